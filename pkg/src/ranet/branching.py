"""Continuous-time typed branching process and its truncated/boosted variants.

Every node of the hat process waits an Exp(1) lifetime, then gives birth to
three children typed by the triangle rules:

* type 1 -> three type-2 children,
* type 2 -> one type-2 child and two type-3 children,
* type 3 -> one type-1 child and two type-3 children,

where the distinguished child position is drawn uniformly.  A node's
``dist`` is its distance to the closest type-1 strict ancestor (0 for
type-1 nodes themselves).  In ``under`` a type-2/3 node with ``dist == k``
has no children.  In ``over`` such an *annoying* node instead has three
(type 2) or four (type 3) type-1 children born at the same instant.

Randomness is keyed by node identity rather than drawn from a sequential
stream: each node carries a 64-bit key derived from its parent's key and
its child slot, and its lifetime and distinguished-child position are
hashes of that key.  The same seed therefore yields the same labels for
the same node whatever order nodes are visited in, so the ``under`` tree is
literally a subtree of the ``hat`` tree and a depth-first sweep sees exactly
the tree that :func:`simulate` stores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ranet.core import InvalidStateError

__all__ = [
    "VARIANTS",
    "BranchTree",
    "GrowthResult",
    "MemoryGuardError",
    "auxiliary_height_of",
    "check_tree",
    "estimate_nodes",
    "growth_experiment",
    "growth_rate",
    "simulate",
]

VARIANTS = ("hat", "under", "over")
DEFAULT_BUDGET = 8 * 2**30
BYTES_PER_NODE = 48
_CODE = {"hat": 0, "under": 1, "over": 2}


class MemoryGuardError(MemoryError):
    """Requested snapshot is expected to exceed the memory budget."""

    def __init__(self, expected_nodes: float, budget: int):
        self.expected_nodes = expected_nodes
        self.budget = budget
        super().__init__(
            f"expected about {expected_nodes:.3g} nodes "
            f"({expected_nodes * BYTES_PER_NODE / 2**30:.3g} GiB) exceeds budget of {budget / 2**30:.3g} GiB"
        )


def growth_rate(variant: str, k: int | None = None) -> float:
    """Exponential growth rate of the expected population.

    The hat process grows like ``e^{2t}``.  Truncation only slows it, so 2
    is used for ``under`` too.  For ``over`` the rate solves
    ``gbar_k(1 / (1 + r)) = 1`` on the reduced type-1 tree.
    """
    _check_variant(variant, k)
    if variant != "over":
        return 2.0
    from ranet.asymptotics import SeriesFamily

    fam = SeriesFamily(k, "over")
    lo, hi = 0.0, 64.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if fam.value(1.0 / (1.0 + mid)) > 1.0:
            lo = mid
        else:
            hi = mid
    return max(2.0, hi)


def estimate_nodes(variant: str, k: int | None, t: float) -> float:
    return 3.0 * math.exp(growth_rate(variant, k) * t)


def _check_variant(variant: str, k: int | None) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant != "hat" and (k is None or k < 3):
        raise ValueError(f"variant {variant!r} needs k >= 3, got {k}")


def _guard(variant: str, k: int | None, t: float, budget: int) -> None:
    est = estimate_nodes(variant, k, t)
    if est * BYTES_PER_NODE > budget:
        raise MemoryGuardError(est, budget)


@dataclass(frozen=True, eq=False)
class BranchTree:
    """Snapshot of a branching process.

    Nodes are stored breadth-first, so every parent precedes its children
    and siblings are contiguous.  ``keys`` identify nodes across variants
    sharing a seed.
    """

    variant: str
    k: int | None
    t: float
    types: np.ndarray
    birth: np.ndarray
    parent: np.ndarray
    dist: np.ndarray
    annoying: np.ndarray
    keys: np.ndarray | None = None
    seed: int | None = None
    depth: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        depth = np.zeros(self.parent.size, dtype=np.int64)
        _fill_depth(self.parent, depth)
        object.__setattr__(self, "depth", depth)

    @classmethod
    def from_arrays(cls, types, parent, birth=None, *, variant="hat", k=None, t=math.inf) -> "BranchTree":
        """Build a tree from parent pointers (parents must precede children)."""
        types = np.asarray(types, dtype=np.int8)
        parent = np.asarray(parent, dtype=np.int64)
        if types.shape != parent.shape or types.size == 0:
            raise ValueError("types and parent must be nonempty and of equal length")
        if parent[0] != -1 or np.any(parent[1:] < 0) or np.any(parent[1:] >= np.arange(1, parent.size)):
            raise ValueError("parent[0] must be -1 and every other parent must precede its child")
        birth = np.zeros(types.size) if birth is None else np.asarray(birth, dtype=np.float64)
        dist = np.zeros(types.size, dtype=np.int64)
        for v in range(1, types.size):
            p = parent[v]
            dist[v] = 0 if types[v] == 1 else (1 if types[p] == 1 else dist[p] + 1)
        return cls(variant, k, float(t), types, birth, parent, dist, np.zeros(types.size, dtype=bool))

    @property
    def num_nodes(self) -> int:
        return int(self.types.size)

    @property
    def height(self) -> int:
        return int(self.depth.max())

    def children_counts(self) -> np.ndarray:
        return np.bincount(self.parent[1:], minlength=self.num_nodes)


@njit(cache=True)
def _fill_depth(parent, depth):
    for v in range(1, parent.size):
        depth[v] = depth[parent[v]] + 1


@njit(cache=True)
def _grow(a, size):
    b = np.empty(size, dtype=a.dtype)
    b[: a.size] = a
    return b


@njit(cache=True)
def _mix(z):
    # splitmix64 finalizer
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _root_key(seed):
    return _mix(np.uint64(seed) ^ np.uint64(0x5851F42D4C957F2D))


@njit(cache=True)
def _child_key(key, c):
    return _mix(key + np.uint64(c + 1) * np.uint64(0xD1B54A32D192ED03))


@njit(cache=True)
def _lifetime(key):
    bits = _mix(key ^ np.uint64(0xA0761D6478BD642F)) >> np.uint64(11)
    u = (np.float64(bits) + 0.5) * (1.0 / 9007199254740992.0)
    return -np.log(u)


@njit(cache=True)
def _pick(key):
    return np.int64(_mix(key ^ np.uint64(0xE7037ED1A0B428DB)) % np.uint64(3))


@njit(cache=True)
def _child_type(tu, c, pick):
    if tu == 1:
        return 2
    if tu == 2:
        return 2 if c == pick else 3
    return 1 if c == pick else 3


@njit(cache=True)
def _simulate(t, code, k, seed, cap):
    types = np.empty(cap, dtype=np.int8)
    birth = np.empty(cap, dtype=np.float64)
    parent = np.empty(cap, dtype=np.int64)
    dist = np.empty(cap, dtype=np.int64)
    keys = np.empty(cap, dtype=np.uint64)
    annoying = np.zeros(cap, dtype=np.bool_)
    types[0] = 1
    birth[0] = 0.0
    parent[0] = -1
    dist[0] = 0
    keys[0] = _root_key(seed)
    size = 1
    head = 0
    while head < size:
        u = head
        head += 1
        tu = types[u]
        boundary = tu != 1 and dist[u] == k
        if boundary and code == 1:
            continue
        if size + 4 > types.size:
            new = 2 * types.size
            types = _grow(types, new)
            birth = _grow(birth, new)
            parent = _grow(parent, new)
            dist = _grow(dist, new)
            keys = _grow(keys, new)
            grown = np.zeros(new, dtype=np.bool_)
            grown[: annoying.size] = annoying
            annoying = grown
        if boundary and code == 2:
            annoying[u] = True
            for c in range(3 if tu == 2 else 4):
                types[size] = 1
                birth[size] = birth[u]
                parent[size] = u
                dist[size] = 0
                keys[size] = _child_key(keys[u], c)
                size += 1
            continue
        cb = birth[u] + _lifetime(keys[u])
        if cb > t:
            continue
        pick = _pick(keys[u])
        for c in range(3):
            ct = _child_type(tu, c, pick)
            types[size] = ct
            birth[size] = cb
            parent[size] = u
            dist[size] = 0 if ct == 1 else (1 if tu == 1 else dist[u] + 1)
            keys[size] = _child_key(keys[u], c)
            size += 1
    return types[:size], birth[:size], parent[:size], dist[:size], annoying[:size], keys[:size]


def simulate(variant: str, k: int | None, t: float, seed: int, *, budget: int = DEFAULT_BUDGET) -> BranchTree:
    """Snapshot at time ``t`` of the chosen process.

    Raises :class:`MemoryGuardError` when ``3 e^{rt}`` nodes would not fit in
    ``budget`` bytes, ``r`` being the variant's growth rate.
    """
    _check_variant(variant, k)
    if not t >= 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    _guard(variant, k, t, budget)
    kk = -1 if variant == "hat" else int(k)
    cap = int(min(max(16.0, 2.0 * math.exp(2.0 * t)), 1 << 26))
    types, birth, parent, dist, ann, keys = _simulate(float(t), _CODE[variant], kk, int(seed), cap)
    return BranchTree(variant, None if variant == "hat" else kk, float(t), types, birth, parent, dist, ann,
                      keys, int(seed))


@njit(cache=True)
def _aux_of(types, parent):
    aux = np.zeros(types.size, dtype=np.int64)
    best = 0
    for v in range(1, types.size):
        aux[v] = aux[parent[v]] + (1 if types[v] == 1 else 0)
        if aux[v] > best:
            best = aux[v]
    return best, aux


def auxiliary_height_of(tree: BranchTree) -> int:
    """Largest number of type-1 nodes on a root path, minus one."""
    if tree.types[0] != 1:
        raise InvalidStateError("root must be of type 1")
    best, _ = _aux_of(tree.types, tree.parent)
    return int(best)


def check_tree(tree: BranchTree) -> list[str]:
    """Exact traversal of all structural rules; returns the violations found."""
    problems: list[str] = []
    types, parent, birth = tree.types, tree.parent, tree.birth
    n = tree.num_nodes
    if types[0] != 1 or parent[0] != -1 or birth[0] != 0.0:
        problems.append("root must be a type-1 node born at time 0")
    if np.any(birth > tree.t):
        problems.append("node born after the snapshot time")
    if n == 1:
        return problems
    kids = parent[1:]
    if np.any(kids >= np.arange(1, n)):
        problems.append("parent after child")
        return problems
    gap = birth[1:] - birth[kids]
    zero_ok = tree.annoying[kids]
    if np.any(gap[~zero_ok] <= 0) or np.any(gap[zero_ok] != 0):
        problems.append("birth times not increasing along a parent edge")
    counts = np.bincount(kids, minlength=n)
    ones = np.bincount(kids, weights=(types[1:] == 1), minlength=n)
    twos = np.bincount(kids, weights=(types[1:] == 2), minlength=n)
    threes = counts - ones - twos
    internal = counts > 0
    t1, t2, t3 = types == 1, types == 2, types == 3
    bad = np.zeros(n, dtype=bool)
    normal = internal & ~tree.annoying
    bad |= normal & (counts != 3)
    bad |= normal & t1 & (twos != 3)
    bad |= normal & t2 & ((twos != 1) | (threes != 2))
    bad |= normal & t3 & ((ones != 1) | (threes != 2))
    ann = tree.annoying
    bad |= ann & (ones != np.where(t2, 3, 4))
    if tree.variant == "under":
        bad |= (~t1) & (tree.dist == tree.k) & internal
    if tree.variant in ("under", "over"):
        bad |= (~t1) & (tree.dist > tree.k)
    if tree.variant == "over":
        bad |= ann != ((~t1) & (tree.dist == tree.k))
    if np.any(bad):
        problems.append(f"typing rule violated at node {int(np.flatnonzero(bad)[0])}")
    # dist must match its definition
    pd = tree.dist[kids]
    expect = np.where(types[1:] == 1, 0, np.where(types[kids] == 1, 1, pd + 1))
    if np.any(tree.dist[1:] != expect):
        problems.append("distance to type-1 ancestor inconsistent")
    return problems


@njit(cache=True)
def _stream(t_grid, code, k, seed):
    # depth-first sweep that never stores the tree
    g = t_grid.size
    t_max = t_grid[g - 1]
    counts = np.zeros(g, dtype=np.int64)
    aux_best = np.zeros(g, dtype=np.int64)
    height = np.zeros(g, dtype=np.int64)
    cap = 1024
    st_type = np.empty(cap, dtype=np.int8)
    st_birth = np.empty(cap, dtype=np.float64)
    st_dist = np.empty(cap, dtype=np.int64)
    st_aux = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_key = np.empty(cap, dtype=np.uint64)
    st_type[0] = 1
    st_birth[0] = 0.0
    st_dist[0] = 0
    st_aux[0] = 0
    st_depth[0] = 0
    st_key[0] = _root_key(seed)
    top = 1
    while top > 0:
        top -= 1
        tu = st_type[top]
        bu = st_birth[top]
        du = st_dist[top]
        au = st_aux[top]
        hu = st_depth[top]
        key = st_key[top]
        # first grid slot containing this node
        j = np.searchsorted(t_grid, bu)
        counts[j] += 1
        if au > aux_best[j]:
            aux_best[j] = au
        if hu > height[j]:
            height[j] = hu
        if top + 4 > cap:
            cap *= 2
            st_type = _grow(st_type, cap)
            st_birth = _grow(st_birth, cap)
            st_dist = _grow(st_dist, cap)
            st_aux = _grow(st_aux, cap)
            st_depth = _grow(st_depth, cap)
            st_key = _grow(st_key, cap)
        boundary = tu != 1 and du == k
        if boundary and code == 1:
            continue
        if boundary and code == 2:
            for c in range(3 if tu == 2 else 4):
                st_type[top] = 1
                st_birth[top] = bu
                st_dist[top] = 0
                st_aux[top] = au + 1
                st_depth[top] = hu + 1
                st_key[top] = _child_key(key, c)
                top += 1
            continue
        cb = bu + _lifetime(key)
        if cb > t_max:
            continue
        pick = _pick(key)
        for c in range(3):
            ct = _child_type(tu, c, pick)
            st_type[top] = ct
            st_birth[top] = cb
            st_dist[top] = 0 if ct == 1 else (1 if tu == 1 else du + 1)
            st_aux[top] = au + (1 if ct == 1 else 0)
            st_depth[top] = hu + 1
            st_key[top] = _child_key(key, c)
            top += 1
    for j in range(1, g):
        counts[j] += counts[j - 1]
        aux_best[j] = max(aux_best[j], aux_best[j - 1])
        height[j] = max(height[j], height[j - 1])
    return counts, aux_best, height


@dataclass(frozen=True)
class GrowthResult:
    """Per-trial measurements at every grid time and the fitted slopes."""

    variant: str
    k: int | None
    t_grid: np.ndarray
    node_count: np.ndarray
    height: np.ndarray
    aux_height: np.ndarray
    seed: int

    CSV_FIELDS = ("variant", "k", "t", "trial", "node_count", "height", "aux_height")

    @property
    def trials(self) -> int:
        return int(self.node_count.shape[0])

    def mean_aux(self) -> np.ndarray:
        return self.aux_height.mean(axis=0)

    def aux_ci(self, z: float = 1.96) -> np.ndarray:
        if self.trials < 2:
            return np.zeros(self.t_grid.size)
        return z * self.aux_height.std(axis=0, ddof=1) / math.sqrt(self.trials)

    @property
    def aux_slope(self) -> float:
        return float(np.polyfit(self.t_grid, self.mean_aux(), 1)[0])

    @property
    def count_slope(self) -> float:
        return float(np.polyfit(self.t_grid, np.log(self.node_count).mean(axis=0), 1)[0])

    def rows(self):
        for i in range(self.trials):
            for j, t in enumerate(self.t_grid):
                yield (self.variant, "" if self.k is None else self.k, float(t), i,
                       int(self.node_count[i, j]), int(self.height[i, j]), int(self.aux_height[i, j]))

    def summary_rows(self):
        ci = self.aux_ci()
        mean = self.mean_aux()
        for j, t in enumerate(self.t_grid):
            yield float(t), float(mean[j]), float(ci[j])


def run_growth_trial(variant: str, k: int | None, t_grid, seed: int):
    """Counts, heights and auxiliary heights at each grid time for one seed."""
    grid = np.asarray(t_grid, dtype=np.float64)
    kk = -1 if variant == "hat" else int(k)
    return _stream(grid, _CODE[variant], kk, int(seed))


def growth_experiment(variant: str, k: int | None, t_grid, trials: int, seed: int, *,
                      budget: int = DEFAULT_BUDGET, runner=None) -> GrowthResult:
    """Measure auxiliary height against time; trial ``i`` uses ``seed + i``.

    Each trial simulates once up to ``max(t_grid)``; the smaller grid times
    read nested snapshots off the birth times.  ``runner`` may be a
    ``map``-like callable used to distribute trials.
    """
    _check_variant(variant, k)
    grid = np.asarray(t_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("t_grid needs at least two points")
    if np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise ValueError("t_grid must be nonnegative and strictly ascending")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _guard(variant, k, float(grid[-1]), budget)
    runner = runner or map
    seeds = [seed + i for i in range(trials)]
    out = list(runner(run_growth_trial, [variant] * trials, [k] * trials, [grid] * trials, seeds))
    counts = np.array([o[0] for o in out])
    aux = np.array([o[1] for o in out])
    height = np.array([o[2] for o in out])
    return GrowthResult(variant, None if variant == "hat" else k, grid, counts, height, aux, seed)
