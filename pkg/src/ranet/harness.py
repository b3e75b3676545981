"""Experiment orchestration: per-trial seeds, parallel map and output emission.

Trial ``i`` of a sweep with base seed ``s`` always uses seed ``s + i``.
Parallel runs map trials through a process pool and collect results in
submission order, so output does not depend on the thread count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from ranet.core import generate_ran
from ranet.metrics import compute_metrics
from ranet.paths import (
    check_path,
    constructive_boundary_path,
    longest_path_bruteforce,
    longest_path_exact,
    meets_power_bound,
)
from ranet.paths.constructive import XI

__all__ = [
    "ExperimentConfig",
    "InvariantFailure",
    "emit",
    "longest_path_trial",
    "metrics_trial",
    "parse_float_grid",
    "parse_int_grid",
    "run_trials",
    "trial_seeds",
]


class InvariantFailure(AssertionError):
    """A checked relation did not hold; the CLI maps this to exit code 1."""


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    grid: tuple = ()
    trials: int = 1
    seed: int = 0
    out: str | None = None
    tol: float | None = None
    threads: int = 1
    fmt: str = "csv"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")


def trial_seeds(base: int, trials: int) -> list[int]:
    return [base + i for i in range(trials)]


_POW = re.compile(r"(\d+)\^(\d+)\Z")


def _parse_int(tok: str) -> int:
    tok = tok.strip()
    m = _POW.match(tok)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    if re.fullmatch(r"\d+(\.\d+)?[eE]\d+", tok):
        val = float(tok)
        if val != int(val):
            raise ValueError(f"not an integer: {tok}")
        return int(val)
    return int(tok)


def parse_int_grid(text: str) -> tuple[int, ...]:
    """Comma-separated integers; ``2^10`` and ``1e5`` forms are accepted."""
    vals = tuple(_parse_int(t) for t in text.split(",") if t.strip())
    if not vals:
        raise ValueError("empty grid")
    return vals


def parse_float_grid(text: str) -> tuple[float, ...]:
    """Comma-separated floats, or ``start:stop:step`` with ``stop`` included."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"bad range {text!r}; expected start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    vals = tuple(float(t) for t in text.split(",") if t.strip())
    if not vals:
        raise ValueError("empty grid")
    return vals


def run_trials(fn: Callable, arg_lists: Sequence[Iterable], threads: int = 1) -> list:
    """``list(map(fn, *arg_lists))``, optionally through a process pool (order kept)."""
    if threads <= 1:
        return list(map(fn, *arg_lists))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, *arg_lists))


def pool_runner(threads: int):
    """A ``map``-like callable for APIs that accept a ``runner``."""
    if threads <= 1:
        return map
    return lambda fn, *args: run_trials(fn, args, threads)


# --- trial bodies (module level so they pickle) ------------------------------


def metrics_trial(n: int, seed: int, num_pairs: int) -> dict:
    graph, tree = generate_ran(n, seed)
    rep = compute_metrics(graph, tree, num_pairs=num_pairs, seed=seed)
    row = dict(zip(rep.FIELDS, rep.row()))
    row["log_n"] = f"{math.log(n):.6f}"
    row["diameter_over_log_n"] = f"{rep.diameter / math.log(n):.6f}"
    row["problems"] = "; ".join(rep.check())
    return row


def longest_path_result(graph, tree, method: str, perm=(0, 1, 2)) -> dict:
    if method == "exact":
        res = longest_path_exact(graph, tree)
    elif method == "brute":
        res = longest_path_bruteforce(graph)
    elif method == "constructive":
        res = constructive_boundary_path(graph, tree, perm)
    else:
        raise ValueError(f"unknown method {method!r}")
    m = graph.num_faces
    problem = check_path(graph, res.vertices)
    out = {
        "n": graph.n,
        "seed": graph.seed,
        "m": m,
        "method": res.method,
        "vertex_count": res.vertex_count,
        "edge_count": res.edge_count,
        "bound": m**XI,
        "problems": problem or "",
        "vertices": list(res.vertices),
    }
    if method == "constructive":
        ok = meets_power_bound(res.edge_count, m)
        nu = graph.boundary
        ends_ok = res.vertices[0] == nu[perm[0]] and res.vertices[-1] == nu[perm[1]] and nu[perm[2]] not in res.vertices
        out["bound_ok"] = ok
        if not ok:
            out["problems"] += f"; edge count {res.edge_count} < m^xi = {m**XI:.6f}"
        if not ends_ok:
            out["problems"] += "; wrong endpoints or touches the avoided vertex"
        out["problems"] = out["problems"].strip("; ")
    return out


def longest_path_trial(n: int, seed: int, method: str, perm=(0, 1, 2)) -> dict:
    graph, tree = generate_ran(n, seed)
    return longest_path_result(graph, tree, method, perm)


# --- output ------------------------------------------------------------------


def _jsonable(v: Any) -> Any:
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, "item"):
        return v.item()
    return v


def emit(rows: list[dict], fields: Sequence[str], fmt: str, stream) -> None:
    """Write ``rows`` as CSV (selected ``fields``) or as a JSON array (all keys)."""
    if fmt == "json":
        json.dump([{k: _jsonable(v) for k, v in r.items()} for r in rows], stream, indent=1)
        stream.write("\n")
        return
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([r.get(f, "") for f in fields])


def emit_to_string(rows: list[dict], fields: Sequence[str], fmt: str) -> str:
    buf = io.StringIO()
    emit(rows, fields, fmt, buf)
    return buf.getvalue()
