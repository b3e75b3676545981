"""Interface profiles: how one simple path meets a triangle-bounded region.

A region is a triangle together with everything strictly inside it.  The
path edges owned by the region (edges with an endpoint strictly inside)
form vertex-disjoint sub-paths.  Since the inside attaches to the rest of
the graph only through the three corners, the rest of the computation only
needs, per corner, its degree in those sub-paths, and which endpoints are
joined.  An endpoint is either a corner of degree 1 or a *free end*: an
inside vertex of degree 1, which must be an end of the whole path.

Profiles are defined over any small ordered tuple of labelled slots, so the
same code handles the 3-corner region state and the 4-slot intermediate
state used while merging three children around the new vertex.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

FREE = -2
NONE = -1


class Profile(NamedTuple):
    """Degree and partner of every slot, plus a both-ends-free flag.

    ``mate[i]`` is the slot joined to slot ``i`` by a sub-path, ``FREE`` if
    the sub-path ends at a free end, or ``NONE`` when ``deg[i] != 1``.
    ``closed`` marks a sub-path with two free ends, which is then the whole
    path (no other sub-path may exist).
    """

    deg: tuple[int, ...]
    mate: tuple[int, ...]
    closed: bool = False

    @property
    def free_ends(self) -> int:
        return sum(1 for m in self.mate if m == FREE) + (2 if self.closed else 0)

    @property
    def components(self) -> int:
        paired = sum(1 for i, m in enumerate(self.mate) if m >= 0 and m > i)
        single = sum(1 for m in self.mate if m == FREE)
        return paired + single + (1 if self.closed else 0)


def empty(size: int = 3) -> Profile:
    return Profile((0,) * size, (NONE,) * size, False)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def glue(parts, edges, keep) -> Profile | None:
    """Combine profiles that share labelled vertices, add edges, project.

    ``parts`` is a sequence of ``(profile, labels)`` pairs mapping each slot
    to a global label; ``edges`` are extra owned edges between labels;
    ``keep`` lists the labels of the result's slots.  Labels that appear in
    a part but not in ``keep`` are forgotten: a forgotten vertex of degree 1
    turns into a free end.  Returns ``None`` if the combination is not a
    set of disjoint simple paths with at most two free ends.
    """
    deg: dict = {}
    uf = _UnionFind()
    has_edge: set = set()
    token = 0
    for prof, labels in parts:
        for i, lab in enumerate(labels):
            deg[lab] = deg.get(lab, 0) + prof.deg[i]
        if prof.closed:
            a, b = ("free", token), ("free", token + 1)
            token += 2
            uf.union(a, b)
            has_edge.add(a)
        for i, m in enumerate(prof.mate):
            if m == FREE:
                t = ("free", token)
                token += 1
                uf.union(labels[i], t)
                has_edge.add(t)
            elif m > i:
                if not uf.union(labels[i], labels[m]):
                    return None
                has_edge.add(labels[i])
    for a, b in edges:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
        if not uf.union(a, b):
            return None
        has_edge.add(a)
    if any(d > 2 for d in deg.values()):
        return None

    ends: dict = {}
    for lab, d in deg.items():
        if d == 1:
            ends.setdefault(uf.find(lab), []).append(lab)
    for t in range(token):
        tok = ("free", t)
        ends.setdefault(uf.find(tok), []).append(tok)
    roots = {uf.find(a) for a in has_edge}
    if any(len(ends.get(r, ())) != 2 for r in roots):
        return None

    slot = {lab: i for i, lab in enumerate(keep)}
    mate = [NONE] * len(keep)
    closed = False
    free = 0
    for r in roots:
        a, b = ends[r]
        sa, sb = slot.get(a, FREE), slot.get(b, FREE)
        free += (sa == FREE) + (sb == FREE)
        if sa == FREE and sb == FREE:
            closed = True
        elif sa == FREE:
            mate[sb] = FREE
        elif sb == FREE:
            mate[sa] = FREE
        else:
            mate[sa], mate[sb] = sb, sa
    if free > 2 or (closed and len(roots) > 1):
        return None
    return Profile(tuple(deg.get(lab, 0) for lab in keep), tuple(mate), closed)


# Labels used while merging node (x, y, z) subdivided by v.
X, Y, Z, V = 0, 1, 2, 3
CHILD_LABELS = ((V, Y, Z), (X, V, Z), (X, Y, V))
# spoke c joins v to corner c
SPOKES = ((V, X), (V, Y), (V, Z))
ROOT_EDGES = ((X, Y), (Y, Z), (X, Z))


class Tables(NamedTuple):
    states: list[Profile]
    inter: list[Profile]
    merge_bc: np.ndarray
    merge_a: np.ndarray
    final: np.ndarray
    empty: int


@lru_cache(maxsize=1)
def tables() -> Tables:
    """Transition tables for the two-stage child merge and the root finish.

    ``merge_bc[sB, sC, e]`` is the 4-slot state after gluing children B and C
    and optionally the spoke to x; ``merge_a[s4, sA, m]`` is the 3-corner
    state after adding child A and spokes to y (bit 0) and z (bit 1), with v
    forgotten; ``final[s, m]`` is 1 when adding outer edges ``m`` to root
    state ``s`` yields a single path.  Entries are -1 when invalid.
    """
    states = [empty(3)]
    index = {states[0]: 0}
    inter: list[Profile] = []
    inter_index: dict = {}
    bc: dict = {}
    a_tab: dict = {}
    frontier_done = 0
    while frontier_done < len(states):
        frontier_done = len(states)
        for i, sb in enumerate(states):
            for j, sc in enumerate(states):
                for e in (0, 1):
                    if (i, j, e) in bc:
                        continue
                    edges = [SPOKES[0]] if e else []
                    r = glue([(sb, CHILD_LABELS[1]), (sc, CHILD_LABELS[2])], edges, (X, Y, Z, V))
                    if r is not None and r not in inter_index:
                        inter_index[r] = len(inter)
                        inter.append(r)
                    bc[i, j, e] = -1 if r is None else inter_index[r]
        for p, s4 in enumerate(inter):
            for i, sa in enumerate(states):
                for mask in range(4):
                    if (p, i, mask) in a_tab:
                        continue
                    edges = [SPOKES[1 + b] for b in range(2) if mask >> b & 1]
                    r = glue([(s4, (X, Y, Z, V)), (sa, CHILD_LABELS[0])], edges, (X, Y, Z))
                    if r is not None and r not in index:
                        index[r] = len(states)
                        states.append(r)
                    a_tab[p, i, mask] = -1 if r is None else index[r]

    n3, n4 = len(states), len(inter)
    merge_bc = np.full((n3, n3, 2), -1, dtype=np.int16)
    for (i, j, e), r in bc.items():
        merge_bc[i, j, e] = r
    merge_a = np.full((n4, n3, 4), -1, dtype=np.int16)
    for (p, i, m), r in a_tab.items():
        merge_a[p, i, m] = r
    final = np.zeros((n3, 8), dtype=np.int8)
    for i, s in enumerate(states):
        for mask in range(8):
            edges = [ROOT_EDGES[b] for b in range(3) if mask >> b & 1]
            r = glue([(s, (X, Y, Z))], edges, (X, Y, Z))
            if r is not None and r.components == 1:
                final[i, mask] = 1
    return Tables(states, inter, merge_bc, merge_a, final, 0)
