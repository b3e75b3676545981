"""Distance statistics: BFS, boundary distance, radius, diameter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ranet.core import InvalidStateError, RanGraph, TriTree

__all__ = [
    "DistanceField",
    "MetricsReport",
    "all_pairs_diameter",
    "auxiliary_height",
    "average_distance_estimate",
    "bfs",
    "compute_metrics",
    "diameter_exact",
    "eccentricity",
    "tau_all",
    "triangle_types_from_tau",
]


@njit(cache=True)
def _bfs(indptr, indices, sources, n):
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    head = 0
    tail = 0
    for s in sources:
        if dist[s] < 0:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = du
                queue[tail] = w
                tail += 1
    return dist


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Hop distances from the nearest of ``sources`` (-1 if unreachable)."""

    sources: tuple[int, ...]
    dist: np.ndarray

    @property
    def max(self) -> int:
        return int(self.dist.max())


def bfs(graph: RanGraph, sources) -> DistanceField:
    srcs = tuple(int(s) for s in np.atleast_1d(sources))
    if not srcs:
        raise ValueError("at least one source is required")
    bad = [s for s in srcs if not 0 <= s < graph.n]
    if bad:
        raise ValueError(f"invalid vertex id(s): {bad}")
    indptr, indices = graph.csr
    dist = _bfs(indptr, indices, np.asarray(srcs, dtype=np.int64), graph.n)
    return DistanceField(srcs, dist)


def eccentricity(graph: RanGraph, v: int) -> int:
    return bfs(graph, [v]).max


def tau_all(graph: RanGraph) -> tuple[DistanceField, int]:
    """Distance of every vertex to the outer triangle, and the radius."""
    field = bfs(graph, graph.boundary)
    return field, field.max


@njit(cache=True)
def _aux_depths(children, types):
    nodes = children.shape[0]
    aux = np.zeros(nodes, dtype=np.int32)
    for f in range(nodes):
        base = children[f]
        if base < 0:
            continue
        for c in range(3):
            aux[base + c] = aux[f] + (1 if types[base + c] == 1 else 0)
    return aux


def auxiliary_height(tree: TriTree) -> tuple[int, np.ndarray]:
    """Return ``(ah(T), aux_depths)`` recomputed from the node types."""
    types = np.asarray(tree.types)
    if types.size == 0 or np.any((types < 1) | (types > 3)):
        raise InvalidStateError("tree has untyped nodes")
    if types[0] != 1:
        raise InvalidStateError("root must be type 1")
    aux = _aux_depths(tree.children, types)
    return int(aux.max()), aux


def triangle_types_from_tau(tree: TriTree, tau: np.ndarray) -> np.ndarray:
    """Classify every triangle by the boundary distances of its corners.

    Type 1: all equal; type 2: two low, one high; type 3: one low, two high.
    Returns 0 where the corners violate the |difference| <= 1 property.
    """
    vals = np.sort(tau[tree.triangles], axis=1)
    lo, mid, hi = vals[:, 0], vals[:, 1], vals[:, 2]
    out = np.zeros(vals.shape[0], dtype=np.int8)
    out[(lo == hi)] = 1
    out[(lo == mid) & (hi == lo + 1)] = 2
    out[(lo + 1 == mid) & (mid == hi)] = 3
    return out


def all_pairs_diameter(graph: RanGraph) -> int:
    """Diameter by BFS from every vertex (scipy); reference for small graphs."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    indptr, indices = graph.csr
    mat = csr_matrix((np.ones(indices.shape[0]), indices, indptr), shape=(graph.n, graph.n))
    d = shortest_path(mat, method="D", unweighted=True, directed=False)
    if np.isinf(d).any():
        raise InvalidStateError("graph is disconnected")
    return int(d.max())


def diameter_exact(graph: RanGraph, *, max_bfs: int | None = None, return_stats: bool = False):
    """Exact diameter by eccentricity bounding.

    Every vertex ``w`` starts with the upper bound ``ecc(w) <= tau(w) + 1 + R``
    (any two vertices connect through the outer triangle).  Each BFS from a
    vertex ``v`` with eccentricity ``e`` tightens, for every ``w``,
    ``max(d(v,w), e - d(v,w)) <= ecc(w) <= e + d(v,w)``.  Vertices whose upper
    bound cannot beat the best eccentricity seen are discarded; the search
    ends when none remain.  Sources alternate between the largest upper and
    the smallest lower bound among the remaining candidates.
    """
    n = graph.n
    indptr, indices = graph.csr
    tau, radius = tau_all(graph)
    upper = tau.dist.astype(np.int64) + 1 + radius
    lower = np.zeros(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    best = 0
    runs = 0
    pick_upper = True
    while True:
        alive &= upper > best
        cand = np.flatnonzero(alive)
        if cand.size == 0:
            break
        if max_bfs is not None and runs >= max_bfs:
            raise RuntimeError(f"diameter search exceeded {max_bfs} BFS runs")
        if pick_upper:
            v = int(cand[np.argmax(upper[cand])])
        else:
            v = int(cand[np.argmin(lower[cand])])
        pick_upper = not pick_upper
        d = _bfs(indptr, indices, np.array([v], dtype=np.int64), n).astype(np.int64)
        runs += 1
        e = int(d.max())
        best = max(best, e)
        np.maximum(lower, np.maximum(d, e - d), out=lower)
        np.minimum(upper, e + d, out=upper)
        alive[v] = False
        best = max(best, int(lower[alive].max()) if alive.any() else 0)
    if return_stats:
        return best, runs
    return best


def average_distance_estimate(
    graph: RanGraph, num_pairs: int, seed: int, *, pairs_per_source: int = 1000
) -> tuple[float, float]:
    """Mean hop distance over random vertex pairs, with its standard error.

    Pairs are drawn in batches sharing a uniformly random source (one BFS per
    batch); targets are uniform over the other vertices.  The standard error
    uses the spread of batch means, so it shrinks with the number of batches.
    """
    if num_pairs < 1:
        raise ValueError("num_pairs must be at least 1")
    if graph.n < 2:
        raise ValueError("need at least two vertices")
    rng = np.random.default_rng(seed)
    batches = math.ceil(num_pairs / pairs_per_source)
    sizes = np.full(batches, num_pairs // batches)
    sizes[: num_pairs % batches] += 1
    indptr, indices = graph.csr
    sums = np.empty(batches)
    sq = 0.0
    for b in range(batches):
        src = int(rng.integers(graph.n))
        tgt = rng.integers(graph.n - 1, size=int(sizes[b]))
        tgt += tgt >= src
        d = _bfs(indptr, indices, np.array([src], dtype=np.int64), graph.n)[tgt].astype(np.float64)
        sums[b] = d.sum()
        sq += float(np.dot(d, d))
    mean = float(sums.sum() / num_pairs)
    if batches >= 2:
        batch_means = sums / sizes
        stderr = float(batch_means.std(ddof=1) / math.sqrt(batches))
    elif num_pairs >= 2:
        var = (sq - num_pairs * mean * mean) / (num_pairs - 1)
        stderr = math.sqrt(max(var, 0.0) / num_pairs)
    else:
        stderr = float("nan")
    return mean, stderr


@dataclass(frozen=True)
class MetricsReport:
    n: int
    seed: int | None
    diameter: int
    radius: int
    aux_height: int
    avg_dist_est: float
    stderr: float

    FIELDS = ("n", "seed", "diameter", "radius", "ah", "avg_dist_est", "stderr")

    def row(self) -> list:
        return [self.n, "" if self.seed is None else self.seed, self.diameter, self.radius,
                self.aux_height, f"{self.avg_dist_est:.6f}", f"{self.stderr:.6f}"]

    def check(self) -> list[str]:
        """Return the violated structural relations (empty when all hold)."""
        problems = []
        if self.radius not in (self.aux_height, self.aux_height + 1):
            problems.append(f"radius {self.radius} not in {{ah, ah+1}} with ah={self.aux_height}")
        if self.diameter > 2 * self.radius + 2:
            problems.append(f"diameter {self.diameter} > 2R+2 = {2 * self.radius + 2}")
        return problems


def compute_metrics(graph: RanGraph, tree: TriTree, *, num_pairs: int = 100_000, seed: int = 0) -> MetricsReport:
    _, radius = tau_all(graph)
    ah, _ = auxiliary_height(tree)
    diam = diameter_exact(graph)
    if graph.n >= 2 and num_pairs > 0:
        mean, err = average_distance_estimate(graph, num_pairs, seed)
    else:
        mean, err = 0.0, 0.0
    return MetricsReport(graph.n, graph.seed, diam, radius, ah, mean, err)
