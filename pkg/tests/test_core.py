import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ranet import MalformedTraceError, generate_ran, generate_standard_subdivision, replay_trace, validate
from ranet.core import standard_subdivision_trace


def test_smallest_network_is_a_triangle():
    g, t = generate_ran(3, 0)
    assert g.num_edges == 3 and g.num_faces == 1 and t.num_nodes == 1
    assert validate(g, t)


def test_k4():
    g, t = generate_ran(4, 123)
    assert {tuple(sorted(e)) for e in g.edges.tolist()} == {(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}
    assert t.num_leaves == 3 and t.types.tolist() == [1, 2, 2, 2]


def test_rejects_small_n():
    with pytest.raises(ValueError):
        generate_ran(2, 0)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 3000), seed=st.integers(0, 2**32))
def test_counts_and_validation(n, seed):
    g, t = generate_ran(n, seed)
    assert g.num_edges == 3 * n - 6
    assert g.num_faces == max(2 * n - 5, 1)
    assert t.num_nodes == max(3 * n - 8, 1)
    assert t.num_leaves == g.num_faces
    rep = validate(g, t)
    assert rep, (rep.check, rep.detail)


def test_same_seed_same_graph_and_replay_roundtrip():
    g1, t1 = generate_ran(500, 9)
    g2, t2 = generate_ran(500, 9)
    assert g1 == g2 and t1 == t2
    g3, t3 = replay_trace(g1.trace, 9)
    assert g3 == g1 and t3 == t1
    assert not np.array_equal(generate_ran(500, 10)[0].trace, g1.trace)


def test_trace_draws_are_uniform_over_faces():
    # the first subdivided child face is uniform over {1, 2, 3}
    firsts = np.array([generate_ran(5, s)[0].trace[1] for s in range(3000)])
    counts = np.bincount(firsts, minlength=4)[1:]
    assert counts.min() > 900


@pytest.mark.parametrize(
    "trace, step",
    [([0, 0], 1), ([0, 7], 1), ([0, 1, 1], 2), ([-1], 0)],
)
def test_malformed_trace_reports_step(trace, step):
    with pytest.raises(MalformedTraceError) as info:
        replay_trace(trace)
    assert info.value.step == step


def test_standard_subdivision_shape():
    for k in range(0, 6):
        g, t = generate_standard_subdivision(k)
        assert g.num_faces == 3**k
        assert t.height == k
        assert np.all(t.leaf_counts[0] == 3**k)
        assert validate(g, t)
    assert standard_subdivision_trace(1).tolist() == [0]


def test_validation_detects_corruption():
    g, t = generate_ran(50, 1)
    edges = g.edges.copy()
    edges[10] = edges[11]
    bad = type(g)(g.n, edges, g.triangles, g.trace, g.seed)
    rep = validate(bad, t)
    assert not rep and rep.check == "simple"


def test_types_follow_rules():
    g, t = generate_ran(2000, 4)
    for f in range(t.num_nodes):
        kids = t.child_ids(f)
        if not kids:
            continue
        kt = sorted(int(t.types[c]) for c in kids)
        expect = {1: [2, 2, 2], 2: [2, 3, 3], 3: [1, 3, 3]}[int(t.types[f])]
        assert kt == expect
