"""Deterministic lower-bound path between two outer vertices.

Inside a triangle with corners ``p, q, r`` subdivided by ``v``, a path from
``p`` to ``q`` avoiding ``r`` is built from two paths in the two children
holding the most faces, joined at ``v``.  By induction the path has at
least ``m ** (log 2 / log 3)`` edges for a region with ``m`` faces.
"""

from __future__ import annotations

import math
from itertools import permutations

import mpmath
import numpy as np
from numba import njit

from ranet.core import RanGraph, TriTree
from ranet.paths.result import PathResult

XI = math.log(2) / math.log(3)

__all__ = ["XI", "constructive_boundary_path", "meets_power_bound", "min_split_value"]


@njit(cache=True)
def _region_path(children, triangles, counts, root, start, end, avoid, height, n):
    # explicit stack of (node, start, end, avoid); tasks pop in path order
    cap = 2 * height + 4
    stack = np.empty((cap, 4), dtype=np.int64)
    stack[0, 0] = root
    stack[0, 1] = start
    stack[0, 2] = end
    stack[0, 3] = avoid
    top = 1
    out = np.empty(n, dtype=np.int64)
    out[0] = start
    size = 1
    while top > 0:
        top -= 1
        f = stack[top, 0]
        s = stack[top, 1]
        e = stack[top, 2]
        r = stack[top, 3]
        base = children[f]
        if base < 0:
            out[size] = e
            size += 1
            continue
        v = triangles[base, 0]
        # child c lacks corner c; the two fullest children, ties by index
        a, b, c = 0, 1, 2
        if counts[base + b] > counts[base + a]:
            a, b = b, a
        if counts[base + c] > counts[base + b]:
            b, c = c, b
            if counts[base + b] > counts[base + a] or (counts[base + b] == counts[base + a] and b < a):
                a, b = b, a
        ca = triangles[f, a]
        cb = triangles[f, b]
        cc = triangles[f, c]
        # path = x ->v inside child1 (avoiding av1), v -> y inside child2
        if r == cc:
            x, y, child1, av1, child2, av2 = ca, cb, base + b, cc, base + a, cc
        elif r == ca:
            x, y, child1, av1, child2, av2 = cb, cc, base + a, cc, base + b, ca
        else:
            x, y, child1, av1, child2, av2 = ca, cc, base + b, cc, base + a, cb
        if s == x:
            first_node, first_av, second_node, second_av = child1, av1, child2, av2
        else:
            first_node, first_av, second_node, second_av = child2, av2, child1, av1
        stack[top, 0] = second_node
        stack[top, 1] = v
        stack[top, 2] = e
        stack[top, 3] = second_av
        stack[top + 1, 0] = first_node
        stack[top + 1, 1] = s
        stack[top + 1, 2] = v
        stack[top + 1, 3] = first_av
        top += 2
    return out[:size]


def constructive_boundary_path(graph: RanGraph, tree: TriTree, perm=(0, 1, 2)) -> PathResult:
    """Path from outer vertex ``perm[0]`` to ``perm[1]`` that avoids ``perm[2]``.

    ``perm`` is a permutation of ``(0, 1, 2)`` indexing the outer vertices.
    """
    if sorted(perm) != [0, 1, 2]:
        raise ValueError(f"not a permutation of (0, 1, 2): {perm}")
    nu = graph.boundary
    start, end, avoid = nu[perm[0]], nu[perm[1]], nu[perm[2]]
    seq = _region_path(tree.children, tree.triangles, tree.leaf_counts, 0, start, end, avoid,
                       tree.height, graph.n)
    return PathResult(tuple(seq.tolist()), "constructive")


def all_permutation_paths(graph: RanGraph, tree: TriTree) -> dict[tuple[int, int, int], PathResult]:
    return {p: constructive_boundary_path(graph, tree, p) for p in permutations(range(3))}


def meets_power_bound(edges: int, faces: int) -> bool:
    """Exact test of ``edges >= faces ** (log 2 / log 3)``.

    When ``faces`` is a power of three the bound is the integer ``2 ** k``;
    otherwise the bound is irrational and 50 significant digits decide.
    """
    k, p = 0, 1
    while p < faces:
        p *= 3
        k += 1
    if p == faces:
        return edges >= 2 ** k
    with mpmath.workdps(50):
        return mpmath.mpf(edges) >= mpmath.power(faces, mpmath.log(2) / mpmath.log(3))


def min_split_value(m: int) -> tuple[float, tuple[int, int, int]]:
    """Smallest ``x1**XI + x2**XI`` over ``x1 >= x2 >= x3 >= 1`` summing to ``m``."""
    best = math.inf
    arg = (0, 0, 0)
    for x3 in range(1, m // 3 + 1):
        for x2 in range(x3, (m - x3) // 2 + 1):
            x1 = m - x2 - x3
            val = x1 ** XI + x2 ** XI
            if val < best:
                best, arg = val, (x1, x2, x3)
    return best, arg
