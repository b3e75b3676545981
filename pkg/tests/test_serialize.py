import numpy as np
import pytest

from ranet import generate_ran
from ranet.serialize import (
    ParseError,
    dump_edges,
    dump_json,
    dump_trace,
    load_json,
    parse_edges,
    parse_trace,
    read_network,
    write_network,
)


def test_trace_roundtrip():
    g, t = generate_ran(300, 4)
    text = dump_trace(g)
    assert text.startswith("RAN-TRACE v1 n=300 seed=4\n")
    trace, seed = parse_trace(text)
    assert seed == 4 and np.array_equal(trace, g.trace)


def test_trace_without_seed():
    from ranet import replay_trace

    g, _ = replay_trace([0, 1, 2])
    assert dump_trace(g).splitlines()[0] == "RAN-TRACE v1 n=6 seed=none"
    assert parse_trace(dump_trace(g))[1] is None


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("RAN-TRACE v2 n=4 seed=0\n0\n", 1),
        ("RAN-TRACE v1 n=5 seed=0\n0\nx1\n", 3),
        ("RAN-TRACE v1 n=6 seed=0\n0\n1\n", 1),
    ],
)
def test_trace_parse_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_trace(text)
    assert info.value.line == line


def test_edges_roundtrip_and_errors():
    g, _ = generate_ran(50, 1)
    assert np.array_equal(parse_edges(dump_edges(g)), g.edges)
    with pytest.raises(ParseError) as info:
        parse_edges("0 1\n  2 x\n")
    assert (info.value.line, info.value.offset) == (2, 2)


def test_json_roundtrip_and_tamper_detection():
    g, t = generate_ran(100, 2)
    text = dump_json(g, t)
    g2, t2 = load_json(text)
    assert g2 == g and t2 == t
    tampered = text.replace('"types":[1,', '"types":[2,')
    with pytest.raises(ParseError):
        load_json(tampered)
    with pytest.raises(ParseError):
        load_json("{not json")


def test_write_and_read_files(tmp_path):
    g, t = generate_ran(4, 0)
    paths = write_network(g, t, tmp_path)
    assert [p.suffix for p in paths] == [".trace", ".edges", ".json"]
    for p in (paths[0], paths[2]):
        g2, _ = read_network(p)
        assert g2 == g
    edges = parse_edges(paths[1].read_text())
    assert {tuple(sorted(e)) for e in edges.tolist()} == {(a, b) for a in range(4) for b in range(a + 1, 4)}


def test_bad_trace_file_reports_path(tmp_path):
    p = tmp_path / "bad.trace"
    p.write_text("RAN-TRACE v1 n=5 seed=0\n0\n0\n")
    with pytest.raises(ParseError, match="bad.trace"):
        read_network(p)
