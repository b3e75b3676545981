"""Exact longest path by dynamic programming over the triangle tree.

Every edge is owned by exactly one tree node: the spokes of a subdivision
belong to the subdivided triangle, the outer triangle's edges to the root.
Working bottom-up, each node keeps, for every interface profile, the most
owned path edges its region can contribute.  Merging a node's children
goes through two precomputed tables (children B and C with the spoke to
the first corner, then child A with the other two spokes), so each node
costs a fixed number of table lookups.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ranet.core import InvalidStateError, RanGraph, TriTree
from ranet.paths.profiles import tables
from ranet.paths.result import PathResult, path_from_edges

__all__ = ["longest_path_exact", "profile_values"]


@njit(cache=True)
def _merge_bc(val, b, c, merge_bc, n3, n4):
    tmp = np.full(n4, -1, dtype=np.int32)
    for sb in range(n3):
        vb = val[b, sb]
        if vb < 0:
            continue
        for sc in range(n3):
            vc = val[c, sc]
            if vc < 0:
                continue
            for e in range(2):
                r = merge_bc[sb, sc, e]
                if r >= 0:
                    cand = vb + vc + e
                    if cand > tmp[r]:
                        tmp[r] = cand
    return tmp


@njit(cache=True)
def _dp(children, merge_bc, merge_a, n3, n4):
    nodes = children.shape[0]
    val = np.full((nodes, n3), -1, dtype=np.int32)
    pop = np.array([0, 1, 1, 2], dtype=np.int32)
    for f in range(nodes - 1, -1, -1):
        base = children[f]
        if base < 0:
            val[f, 0] = 0
            continue
        tmp = _merge_bc(val, base + 1, base + 2, merge_bc, n3, n4)
        for p in range(n4):
            vp = tmp[p]
            if vp < 0:
                continue
            for sa in range(n3):
                va = val[base, sa]
                if va < 0:
                    continue
                for mask in range(4):
                    r = merge_a[p, sa, mask]
                    if r >= 0:
                        cand = vp + va + pop[mask]
                        if cand > val[f, r]:
                            val[f, r] = cand
    return val


@njit(cache=True)
def _reconstruct(children, val, merge_bc, merge_a, root_state, n3, n4, num_edges):
    nodes = children.shape[0]
    pop = np.array([0, 1, 1, 2], dtype=np.int32)
    target = np.full(nodes, -1, dtype=np.int32)
    used = np.zeros(num_edges, dtype=np.bool_)
    target[0] = root_state
    for f in range(nodes):
        base = children[f]
        t = target[f]
        if base < 0 or t < 0:
            continue
        goal = val[f, t]
        tmp = _merge_bc(val, base + 1, base + 2, merge_bc, n3, n4)
        found = False
        for p in range(n4):
            if found:
                break
            vp = tmp[p]
            if vp < 0:
                continue
            for sa in range(n3):
                if found:
                    break
                va = val[base, sa]
                if va < 0:
                    continue
                for mask in range(4):
                    if merge_a[p, sa, mask] == t and vp + va + pop[mask] == goal:
                        target[base] = sa
                        step = (base - 1) // 3
                        if mask & 1:
                            used[3 + 3 * step + 1] = True
                        if mask & 2:
                            used[3 + 3 * step + 2] = True
                        found2 = False
                        for sb in range(n3):
                            if found2:
                                break
                            vb = val[base + 1, sb]
                            if vb < 0:
                                continue
                            for sc in range(n3):
                                if found2:
                                    break
                                vc = val[base + 2, sc]
                                if vc < 0:
                                    continue
                                for e in range(2):
                                    if merge_bc[sb, sc, e] == p and vb + vc + e == vp:
                                        target[base + 1] = sb
                                        target[base + 2] = sc
                                        if e:
                                            used[3 + 3 * step] = True
                                        found2 = True
                                        break
                        found = True
                        break
        if not found:
            return used, f
    return used, -1


def profile_values(tree: TriTree) -> np.ndarray:
    """Best owned-edge count per (node, profile); -1 marks impossible."""
    tab = tables()
    return _dp(tree.children, tab.merge_bc, tab.merge_a, len(tab.states), len(tab.inter))


def longest_path_exact(graph: RanGraph, tree: TriTree) -> PathResult:
    """A longest simple path of ``graph``, found by the profile DP.

    Ties are broken by the fixed enumeration order of the tables, so the
    result is deterministic.
    """
    if tree.num_nodes != graph.triangles.shape[0] or not np.array_equal(tree.triangles, graph.triangles):
        raise InvalidStateError("tree does not belong to this graph")
    tab = tables()
    n3, n4 = len(tab.states), len(tab.inter)
    val = _dp(tree.children, tab.merge_bc, tab.merge_a, n3, n4)
    best, best_state, best_mask = -1, -1, -1
    for s in range(n3):
        if val[0, s] < 0:
            continue
        for mask in range(8):
            if tab.final[s, mask]:
                cand = int(val[0, s]) + bin(mask).count("1")
                if cand > best:
                    best, best_state, best_mask = cand, s, mask
    if best < 0:
        raise InvalidStateError("no path found; tables and tree disagree")
    used, bad = _reconstruct(tree.children, val, tab.merge_bc, tab.merge_a, best_state, n3, n4, graph.num_edges)
    if bad >= 0:
        raise InvalidStateError(f"reconstruction failed at node {bad}")
    for b in range(3):
        if best_mask >> b & 1:
            used[b] = True
    edges = graph.edges[used]
    if edges.shape[0] != best:
        raise InvalidStateError("reconstructed edge count differs from the optimum")
    return path_from_edges(edges, "exact-dp")
