"""Check that a path misses the inside of some grandchild triangle.

A node with nine grandchildren has only seven vertices on the boundaries of
those grandchildren, and a path can cross between grandchildren only
through them, so it visits the inside of at most eight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ranet.core import RanGraph, TriTree

__all__ = ["ObstructionReport", "check_grandchild_obstruction", "interior_hits"]


@dataclass(frozen=True, eq=False)
class ObstructionReport:
    """``witness[i]`` is a grandchild of ``nodes[i]`` whose inside the path misses."""

    nodes: np.ndarray
    witness: np.ndarray
    violations: np.ndarray

    @property
    def ok(self) -> bool:
        return self.violations.size == 0

    @property
    def checked(self) -> int:
        return int(self.nodes.size)


def interior_hits(graph: RanGraph, tree: TriTree, vertices) -> np.ndarray:
    """Mark every triangle that has a path vertex strictly inside it.

    Vertex ``u >= 3`` lies strictly inside exactly the triangle it
    subdivided and that triangle's ancestors.
    """
    hit = np.zeros(tree.num_nodes, dtype=bool)
    for u in vertices:
        u = int(u)
        if u < 3:
            continue
        f = int(graph.trace[u - 3])
        while f >= 0 and not hit[f]:
            hit[f] = True
            f = int(tree.parent[f])
    return hit


def check_grandchild_obstruction(graph: RanGraph, tree: TriTree, vertices) -> ObstructionReport:
    hit = interior_hits(graph, tree, vertices)
    children = tree.children.astype(np.int64)
    internal = np.flatnonzero(children >= 0)
    kids = children[internal][:, None] + np.arange(3)
    full = np.all(children[kids] >= 0, axis=1)
    nodes = internal[full]
    grand = (children[kids[full]][:, :, None] + np.arange(3)).reshape(-1, 9)
    missed = ~hit[grand]
    has_witness = missed.any(axis=1)
    witness = np.where(has_witness, grand[np.arange(grand.shape[0]), np.argmax(missed, axis=1)], -1)
    return ObstructionReport(nodes, witness, nodes[~has_witness])
