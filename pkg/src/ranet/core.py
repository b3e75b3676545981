"""Random Apollonian network generation and the triangle tree.

Conventions (frozen, every other module relies on them):

* Vertices are numbered ``0..n-1``; the outer triangle is ``0, 1, 2`` and
  the vertex inserted at step ``j`` (0-based) is ``3 + j``.
* Triangles ("faces" while they are leaves) are numbered by creation
  order.  The outer triangle is face 0; subdividing face ``(x, y, z)`` at
  step ``j`` with new vertex ``v`` creates faces ``3j+1, 3j+2, 3j+3`` equal
  to ``(v, y, z)``, ``(x, v, z)``, ``(x, y, v)``.
* Child ``c`` of a node is the triangle in which slot ``c`` of the parent
  was replaced by the new vertex.
* Edges ``0..2`` are the outer triangle; edges ``3+3j .. 5+3j`` are the three
  spokes ``(v, x), (v, y), (v, z)`` created at step ``j``.

The trace of a network is the sequence of subdivided face ids.  Random
generation draws one integer per step with numpy's PCG64 generator
(``numpy.random.default_rng(seed)``): at step ``j`` the index
``rng.integers(0, 2j + 1)`` selects a slot of the live-face array, which is
maintained by swap-remove (the chosen slot receives the last live face, then
the three children are appended).  All draws are made in one vectorised
call, so the stream is identical to drawing them one step at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

__all__ = [
    "InvalidStateError",
    "MalformedTraceError",
    "RanGraph",
    "TriTree",
    "ValidationReport",
    "generate_ran",
    "generate_standard_subdivision",
    "replay_trace",
    "standard_subdivision_trace",
    "validate",
]

class InvalidStateError(RuntimeError):
    """Inputs are individually well-formed but inconsistent with each other."""


class MalformedTraceError(ValueError):
    """A trace refers to a face that is not alive at that step."""

    def __init__(self, step: int, face: int, reason: str):
        super().__init__(f"step {step}: face {face} {reason}")
        self.step = step
        self.face = face


@njit(cache=True)
def _sample_trace(draws):
    # swap-remove live-face array; draws[j] < 2j + 1
    steps = draws.shape[0]
    live = np.empty(2 * steps + 1, dtype=np.int64)
    live[0] = 0
    size = 1
    trace = np.empty(steps, dtype=np.int64)
    for j in range(steps):
        r = draws[j]
        f = live[r]
        trace[j] = f
        size -= 1
        live[r] = live[size]
        live[size] = 3 * j + 1
        live[size + 1] = 3 * j + 2
        live[size + 2] = 3 * j + 3
        size += 3
    return trace


@njit(cache=True)
def _first_bad_step(trace):
    """Return (step, code) of the first invalid entry, or (-1, 0)."""
    steps = trace.shape[0]
    done = np.zeros(3 * steps + 1, dtype=np.bool_)
    for j in range(steps):
        f = trace[j]
        if f < 0 or f > 3 * j:
            return j, 1
        if done[f]:
            return j, 2
        done[f] = True
    return -1, 0


@njit(cache=True)
def _build(trace):
    steps = trace.shape[0]
    nodes = 3 * steps + 1
    tri = np.empty((nodes, 3), dtype=np.int32)
    parent = np.full(nodes, -1, dtype=np.int32)
    children = np.full(nodes, -1, dtype=np.int32)
    depth = np.zeros(nodes, dtype=np.int32)
    edges = np.empty((3 * steps + 3, 2), dtype=np.int32)
    tri[0, 0] = 0
    tri[0, 1] = 1
    tri[0, 2] = 2
    edges[0, 0] = 0
    edges[0, 1] = 1
    edges[1, 0] = 1
    edges[1, 1] = 2
    edges[2, 0] = 0
    edges[2, 1] = 2
    for j in range(steps):
        f = trace[j]
        v = 3 + j
        base = 3 * j + 1
        children[f] = base
        for c in range(3):
            node = base + c
            for s in range(3):
                tri[node, s] = tri[f, s]
            tri[node, c] = v
            parent[node] = f
            depth[node] = depth[f] + 1
            edges[3 + 3 * j + c, 0] = v
            edges[3 + 3 * j + c, 1] = tri[f, c]
    return tri, parent, children, depth, edges


@njit(cache=True)
def _propagate_types(children):
    # rules: 1 -> (2,2,2); 2 -> one 2 + two 3; 3 -> one 1 + two 3.
    # ``mark`` is the distinguished slot: odd vertex of a type-2 triangle,
    # low vertex of a type-3 triangle.
    nodes = children.shape[0]
    types = np.zeros(nodes, dtype=np.int8)
    mark = np.full(nodes, -1, dtype=np.int8)
    aux = np.zeros(nodes, dtype=np.int32)
    types[0] = 1
    for f in range(nodes):
        base = children[f]
        if base < 0:
            continue
        t = types[f]
        s = mark[f]
        for c in range(3):
            node = base + c
            if t == 1:
                types[node] = 2
                mark[node] = c
            elif t == 2:
                if c == s:
                    types[node] = 2
                    mark[node] = c
                else:
                    types[node] = 3
                    mark[node] = 3 - s - c
            else:
                if c == s:
                    types[node] = 1
                else:
                    types[node] = 3
                    mark[node] = s
            aux[node] = aux[f] + (1 if types[node] == 1 else 0)
    return types, aux


@dataclass(frozen=True, eq=False)
class RanGraph:
    """A plane triangulation built by repeated face subdivision.

    ``triangles`` lists every triangle ever created (indexed by face id);
    the bounded faces are the ones never subdivided.  Arrays are not
    copied and must be treated as read-only.
    """

    n: int
    edges: np.ndarray
    triangles: np.ndarray
    trace: np.ndarray
    seed: int | None = None
    boundary: tuple[int, int, int] = (0, 1, 2)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def face_ids(self) -> np.ndarray:
        alive = np.ones(self.triangles.shape[0], dtype=bool)
        alive[self.trace] = False
        return np.flatnonzero(alive)

    @property
    def faces(self) -> np.ndarray:
        """Vertex triples of the bounded faces, ordered by face id."""
        return self.triangles[self.face_ids]

    @property
    def num_faces(self) -> int:
        return int(self.face_ids.shape[0])

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency as ``(indptr, indices)``; neighbours in edge order."""
        return _csr(self.n, np.ascontiguousarray(self.edges))

    @cached_property
    def edge_keys(self) -> np.ndarray:
        """Sorted ``min * n + max`` codes of all edges, for adjacency lookups."""
        e = self.edges.astype(np.int64)
        return np.sort(np.minimum(e[:, 0], e[:, 1]) * self.n + np.maximum(e[:, 0], e[:, 1]))

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[v]:indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.csr[0])

    def adjacency_sets(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges.tolist():
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RanGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.seed == other.seed
            and self.boundary == other.boundary
            and np.array_equal(self.trace, other.trace)
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.triangles, other.triangles)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class TriTree:
    """The triangle tree: one node per triangle, typed by rules (a)-(d).

    ``children[f]`` is the id of the first child of ``f`` (the other two
    follow consecutively) or -1 for a leaf.  ``aux_depth`` counts type-1
    nodes on the root path, minus one.
    """

    triangles: np.ndarray
    parent: np.ndarray
    children: np.ndarray
    depth: np.ndarray
    types: np.ndarray
    aux_depth: np.ndarray

    @property
    def num_nodes(self) -> int:
        return int(self.parent.shape[0])

    @property
    def num_leaves(self) -> int:
        return int(np.count_nonzero(self.children < 0))

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.children < 0)

    @property
    def height(self) -> int:
        return int(self.depth.max())

    @property
    def aux_height(self) -> int:
        return int(self.aux_depth.max())

    def child_ids(self, f: int) -> tuple[int, int, int] | tuple[()]:
        base = int(self.children[f])
        if base < 0:
            return ()
        return base, base + 1, base + 2

    @cached_property
    def leaf_counts(self) -> np.ndarray:
        """Number of bounded faces inside each triangle."""
        return _leaf_counts(self.children)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TriTree):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("triangles", "parent", "children", "depth", "types", "aux_depth")
        )

    __hash__ = None  # type: ignore[assignment]


@njit(cache=True)
def _csr(n, edges):
    m = edges.shape[0]
    indptr = np.zeros(n + 1, dtype=np.int64)
    for e in range(m):
        indptr[edges[e, 0] + 1] += 1
        indptr[edges[e, 1] + 1] += 1
    for v in range(n):
        indptr[v + 1] += indptr[v]
    fill = indptr[:-1].copy()
    indices = np.empty(2 * m, dtype=np.int32)
    for e in range(m):
        u = edges[e, 0]
        v = edges[e, 1]
        indices[fill[u]] = v
        fill[u] += 1
        indices[fill[v]] = u
        fill[v] += 1
    return indptr, indices


@njit(cache=True)
def _leaf_counts(children):
    nodes = children.shape[0]
    counts = np.ones(nodes, dtype=np.int64)
    for f in range(nodes - 1, -1, -1):
        base = children[f]
        if base >= 0:
            counts[f] = counts[base] + counts[base + 1] + counts[base + 2]
    return counts


def _assemble(trace: np.ndarray, seed: int | None) -> tuple[RanGraph, TriTree]:
    trace = np.ascontiguousarray(trace, dtype=np.int64)
    tri, parent, children, depth, edges = _build(trace)
    types, aux = _propagate_types(children)
    graph = RanGraph(n=int(trace.shape[0]) + 3, edges=edges, triangles=tri, trace=trace, seed=seed)
    tree = TriTree(triangles=tri, parent=parent, children=children, depth=depth, types=types, aux_depth=aux)
    return graph, tree


def generate_ran(n: int, seed: int) -> tuple[RanGraph, TriTree]:
    """Grow a random Apollonian network on ``n`` vertices.

    Each of the ``n - 3`` steps picks a bounded face uniformly at random and
    subdivides it.  The result depends only on ``(n, seed)``.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    steps = n - 3
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, 2 * np.arange(steps, dtype=np.int64) + 1) if steps else np.empty(0, np.int64)
    trace = _sample_trace(np.ascontiguousarray(draws, dtype=np.int64))
    return _assemble(trace, seed)


def standard_subdivision_trace(k: int) -> np.ndarray:
    """Trace that subdivides every triangle once per level, ``k`` levels deep."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    trace: list[int] = []
    level = [0]
    for _ in range(k):
        nxt = []
        for f in level:
            j = len(trace)
            trace.append(f)
            nxt.extend((3 * j + 1, 3 * j + 2, 3 * j + 3))
        level = nxt
    return np.asarray(trace, dtype=np.int64)


def generate_standard_subdivision(k: int) -> tuple[RanGraph, TriTree]:
    return _assemble(standard_subdivision_trace(k), None)


def replay_trace(trace, seed: int | None = None) -> tuple[RanGraph, TriTree]:
    """Rebuild a network from its trace, checking that each face is alive."""
    trace = np.ascontiguousarray(np.asarray(trace, dtype=np.int64).reshape(-1))
    step, code = _first_bad_step(trace)
    if step >= 0:
        face = int(trace[step])
        reason = "does not exist yet" if code == 1 else "was already subdivided"
        raise MalformedTraceError(int(step), face, reason)
    return _assemble(trace, seed)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    check: str = ""
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _fail(check: str, detail: str) -> ValidationReport:
    return ValidationReport(False, check, detail)


def validate(graph: RanGraph, tree: TriTree, *, replay: bool = True) -> ValidationReport:
    """Check every structural invariant of a (graph, tree) pair.

    Returns the first violation found, in the order: counts, simplicity,
    boundary, faces, insertion degrees, connectivity, tree shape, typing
    rules, auxiliary depths, replay.
    """
    n = graph.n
    if n < 3:
        return _fail("vertex-count", f"n={n} < 3")
    edges = np.asarray(graph.edges)
    if edges.shape[0] != 3 * n - 6:
        return _fail("edge-count", f"{edges.shape[0]} edges, expected {3 * n - 6}")
    m = graph.num_faces
    if m != max(2 * n - 5, 1):
        return _fail("face-count", f"{m} faces, expected {max(2 * n - 5, 1)}")

    if edges.min() < 0 or edges.max() >= n:
        return _fail("edge-range", "edge endpoint outside 0..n-1")
    if np.any(edges[:, 0] == edges[:, 1]):
        return _fail("simple", "self-loop")
    lo = np.minimum(edges[:, 0], edges[:, 1]).astype(np.int64)
    hi = np.maximum(edges[:, 0], edges[:, 1]).astype(np.int64)
    keys = lo * n + hi
    if np.unique(keys).shape[0] != keys.shape[0]:
        return _fail("simple", "parallel edges")

    a, b, c = graph.boundary
    for u, v in ((a, b), (b, c), (a, c)):
        if not np.any(keys == min(u, v) * n + max(u, v)):
            return _fail("boundary", f"boundary vertices {u},{v} not adjacent")

    faces = graph.faces.astype(np.int64)
    for s, t in ((0, 1), (1, 2), (0, 2)):
        fk = np.minimum(faces[:, s], faces[:, t]) * n + np.maximum(faces[:, s], faces[:, t])
        missing = ~np.isin(fk, keys)
        if missing.any():
            bad = int(graph.face_ids[np.argmax(missing)])
            return _fail("faces", f"face {bad} is not a triangle of the graph")

    lower = np.bincount(hi, minlength=n)
    bad = np.flatnonzero(lower[3:] != 3)
    if bad.size:
        return _fail("insertion-degree", f"vertex {int(bad[0]) + 3} has {int(lower[bad[0] + 3])} earlier neighbours")

    if not _connected(graph):
        return _fail("connected", "graph is disconnected")

    nodes = tree.num_nodes
    expected_nodes = 3 * n - 8 if n >= 4 else 1
    if nodes != expected_nodes:
        return _fail("tree-nodes", f"{nodes} nodes, expected {expected_nodes}")
    if tree.num_leaves != m:
        return _fail("tree-leaves", f"{tree.num_leaves} leaves, expected {m}")
    if not np.array_equal(tree.leaves, graph.face_ids):
        return _fail("tree-leaves", "leaves do not match bounded faces")
    internal = np.flatnonzero(tree.children >= 0)
    base = tree.children[internal].astype(np.int64)
    kids = base[:, None] + np.arange(3)
    if internal.size and (kids.max() >= nodes or np.any(tree.parent[np.minimum(kids, nodes - 1)] != internal[:, None])):
        return _fail("tree-shape", "an internal node does not have exactly three children")

    types = np.asarray(tree.types)
    if types[0] != 1:
        return _fail("typing", "root is not type 1")
    if internal.size:
        kid_types = np.sort(types[kids], axis=1)
        allowed = np.array([[0, 0, 0], [2, 2, 2], [2, 3, 3], [1, 3, 3]], dtype=kid_types.dtype)
        parent_types = types[internal]
        bad = np.flatnonzero((parent_types < 1) | (parent_types > 3)
                             | np.any(kid_types != allowed[np.clip(parent_types, 0, 3)], axis=1))
        if bad.size:
            f = int(internal[bad[0]])
            return _fail("typing", f"node {f} of type {int(types[f])} has children of types {kid_types[bad[0]].tolist()}")

    parents = tree.parent[1:]
    expected_aux = tree.aux_depth[parents] + (types[1:] == 1)
    if tree.aux_depth[0] != 0 or not np.array_equal(tree.aux_depth[1:], expected_aux):
        return _fail("aux-depth", "auxiliary depths inconsistent with types")

    if replay:
        try:
            g2, t2 = replay_trace(graph.trace, graph.seed)
        except MalformedTraceError as exc:
            return _fail("replay", str(exc))
        if not (g2 == graph and np.array_equal(t2.children, tree.children)):
            return _fail("replay", "replaying the trace does not reproduce the graph")
    return ValidationReport(True)


def _connected(graph: RanGraph) -> bool:
    from ranet.metrics import bfs

    return bool(np.all(bfs(graph, [0]).dist >= 0))
