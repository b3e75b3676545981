"""Text and JSON formats for networks.

Trace file::

    RAN-TRACE v1 n=<n> seed=<seed or none>
    <face id>
    ...

one subdivided face id per line, in step order.  Edge list: one ``<u> <v>``
pair per line.  JSON carries the trace, bounded faces and the typed tree.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from ranet.core import RanGraph, TriTree, replay_trace

__all__ = [
    "ParseError",
    "dump_edges",
    "dump_json",
    "dump_trace",
    "load_json",
    "parse_edges",
    "parse_trace",
    "read_network",
    "write_network",
]

_HEADER = re.compile(r"RAN-TRACE v1 n=(\d+) seed=(none|\d+)\Z")


class ParseError(ValueError):
    """Malformed input; ``line`` is 1-based and ``offset`` is the 0-based column."""

    def __init__(self, message: str, line: int, offset: int = 0, source: str | None = None):
        self.line = line
        self.offset = offset
        self.source = source
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line}:{offset}: {message}")


def dump_trace(graph: RanGraph) -> str:
    seed = "none" if graph.seed is None else str(graph.seed)
    lines = [f"RAN-TRACE v1 n={graph.n} seed={seed}"]
    lines.extend(map(str, graph.trace.tolist()))
    return "\n".join(lines) + "\n"


def parse_trace(text: str, source: str | None = None) -> tuple[np.ndarray, int | None]:
    """Parse a trace file into ``(trace, seed)``; the header's ``n`` must match."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input, expected a RAN-TRACE header", 1, 0, source)
    m = _HEADER.match(lines[0].strip())
    if m is None:
        raise ParseError(f"bad header {lines[0][:60]!r}", 1, 0, source)
    n = int(m.group(1))
    seed = None if m.group(2) == "none" else int(m.group(2))
    body = [(i, ln) for i, ln in enumerate(lines[1:], start=2) if ln.strip()]
    trace = np.empty(len(body), dtype=np.int64)
    for j, (i, ln) in enumerate(body):
        tok = ln.strip()
        if not tok.isdigit():
            raise ParseError(f"expected a face id, got {tok!r}", i, len(ln) - len(ln.lstrip()), source)
        trace[j] = int(tok)
    if n < 3 or trace.size != n - 3:
        raise ParseError(f"header says n={n} but {trace.size} steps follow (need n-3)", 1, 0, source)
    return trace, seed


def dump_edges(graph: RanGraph) -> str:
    return "".join(f"{u} {v}\n" for u, v in graph.edges.tolist())


def parse_edges(text: str, source: str | None = None) -> np.ndarray:
    rows = []
    for i, ln in enumerate(text.splitlines(), start=1):
        if not ln.strip():
            continue
        parts = ln.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ParseError(f"expected '<u> <v>', got {ln.strip()[:40]!r}", i, len(ln) - len(ln.lstrip()), source)
        rows.append((int(parts[0]), int(parts[1])))
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def dump_json(graph: RanGraph, tree: TriTree) -> str:
    doc = {
        "format": "ran-json-v1",
        "n": graph.n,
        "seed": graph.seed,
        "trace": graph.trace.tolist(),
        "faces": graph.faces.tolist(),
        "tree": {
            "triangles": tree.triangles.tolist(),
            "parent": tree.parent.tolist(),
            "types": tree.types.tolist(),
            "aux_depth": tree.aux_depth.tolist(),
        },
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def load_json(text: str, source: str | None = None) -> tuple[RanGraph, TriTree]:
    """Rebuild a network from JSON and check the stored faces and tree against the replay."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno - 1, source) from None
    if not isinstance(doc, dict) or doc.get("format") != "ran-json-v1":
        raise ParseError("not a ran-json-v1 document", 1, 0, source)
    try:
        graph, tree = replay_trace(np.asarray(doc["trace"], dtype=np.int64), doc.get("seed"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid trace: {exc}", 1, 0, source) from None
    t = doc.get("tree", {})
    same = (
        doc.get("n") == graph.n
        and np.array_equal(np.asarray(doc.get("faces", [])).reshape(-1, 3), graph.faces)
        and np.array_equal(np.asarray(t.get("triangles", [])).reshape(-1, 3), tree.triangles)
        and np.array_equal(np.asarray(t.get("parent", [])), tree.parent)
        and np.array_equal(np.asarray(t.get("types", [])), tree.types)
    )
    if not same:
        raise ParseError("stored faces or tree disagree with the trace", 1, 0, source)
    return graph, tree


def write_network(graph: RanGraph, tree: TriTree, out_dir, stem: str | None = None) -> list[Path]:
    """Write ``<stem>.trace``, ``<stem>.edges`` and ``<stem>.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or f"ran_n{graph.n}_s{'none' if graph.seed is None else graph.seed}"
    paths = [out / f"{stem}.trace", out / f"{stem}.edges", out / f"{stem}.json"]
    for p, text in zip(paths, (dump_trace(graph), dump_edges(graph), dump_json(graph, tree))):
        p.write_text(text)
    return paths


def read_network(path) -> tuple[RanGraph, TriTree]:
    """Load a ``.trace`` or ``.json`` file."""
    p = Path(path)
    text = p.read_text()
    if p.suffix == ".json":
        return load_json(text, str(p))
    trace, seed = parse_trace(text, str(p))
    try:
        return replay_trace(trace, seed)
    except ValueError as exc:
        raise ParseError(str(exc), 1, 0, str(p)) from None
