from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ranet.core import RanGraph

METHODS = ("exact-dp", "brute-force", "constructive")


@dataclass(frozen=True)
class PathResult:
    """A simple path given by its vertex sequence.

    ``vertex_count`` is the number of vertices on the path and
    ``edge_count`` the number of edges; both are stored to keep the two
    length conventions apart.
    """

    vertices: tuple[int, ...]
    method: str

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return max(len(self.vertices) - 1, 0)

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.vertices[0], self.vertices[-1]

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "vertex_count": self.vertex_count,
            "edge_count": self.edge_count,
            "method": self.method,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "PathResult":
        return cls(tuple(int(v) for v in data["vertices"]), str(data["method"]))


def path_from_edges(edges, method: str) -> PathResult:
    """Order the edges of a simple path into a vertex sequence.

    The walk starts at the smaller endpoint.
    """
    edges = np.asarray(edges).reshape(-1, 2)
    if edges.shape[0] == 0:
        raise ValueError("empty edge set")
    adj: dict[int, list[int]] = {}
    for u, v in edges.tolist():
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    ends = sorted(v for v, nb in adj.items() if len(nb) == 1)
    if len(ends) != 2 or any(len(nb) > 2 for nb in adj.values()):
        raise ValueError("edges do not form a single simple path")
    seq = [ends[0]]
    prev = -1
    cur = ends[0]
    while True:
        nxt = [w for w in adj[cur] if w != prev]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        seq.append(cur)
    if len(seq) != len(adj):
        raise ValueError("edges do not form a single simple path")
    return PathResult(tuple(seq), method)


def check_path(graph: RanGraph, vertices) -> str | None:
    """Return a description of the first problem, or None for a valid path."""
    seq = np.asarray(vertices, dtype=np.int64).ravel()
    if seq.size == 0:
        return "empty path"
    if seq.min() < 0 or seq.max() >= graph.n:
        return "vertex id out of range"
    if np.unique(seq).size != seq.size:
        return "repeated vertex"
    if seq.size == 1:
        return None
    n = np.int64(graph.n)
    known = graph.edge_keys
    a, b = seq[:-1], seq[1:]
    keys = np.minimum(a, b) * n + np.maximum(a, b)
    pos = np.minimum(np.searchsorted(known, keys), known.size - 1)
    bad = np.flatnonzero(known[pos] != keys)
    if bad.size:
        i = int(bad[0])
        return f"{int(a[i])} and {int(b[i])} are not adjacent"
    return None
