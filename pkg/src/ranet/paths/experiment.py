"""Longest-path length relative to n across a grid of sizes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ranet.core import generate_ran
from ranet.paths.constructive import XI
from ranet.paths.dp import longest_path_exact


@dataclass(frozen=True)
class TrendRow:
    n: int
    trials: int
    mean_ratio: float
    std_ratio: float
    min_vertices: int
    lower_bound_ratio: float

    FIELDS = ("n", "trials", "mean_ratio", "std_ratio", "min_vertices", "lower_bound_ratio")

    def row(self) -> list:
        return [self.n, self.trials, f"{self.mean_ratio:.6f}", f"{self.std_ratio:.6f}",
                self.min_vertices, f"{self.lower_bound_ratio:.6f}"]


def lm_trend_experiment(n_grid, trials: int, seed: int) -> list[TrendRow]:
    """Mean of (longest-path vertex count) / n for each n; trial i uses ``seed + i``."""
    grid = [int(n) for n in n_grid]
    if grid != sorted(grid):
        raise ValueError("n grid must be sorted ascending")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rows = []
    for n in grid:
        counts = np.array([longest_path_exact(*generate_ran(n, seed + i)).vertex_count for i in range(trials)])
        ratios = counts / n
        m = max(2 * n - 5, 1)
        rows.append(TrendRow(n, trials, float(ratios.mean()), float(ratios.std(ddof=1)) if trials > 1 else 0.0,
                             int(counts.min()), (m ** XI + 2) / n))
    return rows
