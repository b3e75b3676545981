"""Exhaustive longest-path search for small graphs (test oracle)."""

from __future__ import annotations

from ranet.core import RanGraph
from ranet.paths.result import PathResult

MAX_VERTICES = 14


class OracleGuardError(ValueError):
    """The brute-force oracle was asked to search a graph that is too large."""


def longest_path_bruteforce(graph: RanGraph, *, limit: int = MAX_VERTICES) -> PathResult:
    """Longest simple path by enumerating every vertex subset reachable as a path.

    ``ends[mask]`` is the set (bitmask) of vertices at which some simple path
    visiting exactly ``mask`` can end.  Masks are processed in increasing
    order, so every extension is seen; the answer is the largest mask with a
    nonempty end set.  Shares nothing with the tree DP.
    """
    n = graph.n
    if n > limit:
        raise OracleGuardError(f"brute force refuses n={n} > {limit}")
    nbr = [0] * n
    for u, v in graph.edges.tolist():
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
    full = 1 << n
    ends = [0] * full
    for v in range(n):
        ends[1 << v] = 1 << v
    best = 1
    for mask in range(1, full):
        e = ends[mask]
        if not e:
            continue
        if mask.bit_count() > best.bit_count() or (mask.bit_count() == best.bit_count() and mask < best):
            best = mask
        free = ~mask
        while e:
            low = e & -e
            v = low.bit_length() - 1
            e ^= low
            ext = nbr[v] & free
            while ext:
                bit = ext & -ext
                ext ^= bit
                ends[mask | bit] |= bit
    return PathResult(tuple(_walk_back(best, ends, nbr)), "brute-force")


def _walk_back(mask: int, ends: list[int], nbr: list[int]) -> list[int]:
    e = ends[mask]
    v = (e & -e).bit_length() - 1
    seq = [v]
    while mask.bit_count() > 1:
        rest = mask ^ (1 << v)
        cand = ends[rest] & nbr[v]
        u = (cand & -cand).bit_length() - 1
        seq.append(u)
        mask, v = rest, u
    seq.reverse()
    return seq
