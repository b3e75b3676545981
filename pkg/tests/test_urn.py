import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from ranet import generate_ran
from ranet.urn import (
    BetaParams,
    arcsine_cdf,
    beta_cdf,
    conditional_split_experiment,
    face_split_experiment,
    grandchild_counts,
    ks_critical,
    ks_distance,
    sqrt_cdf,
    urn_equivalence_test,
    urn_final_counts,
    urn_simulate,
)


def test_zero_draws():
    s = urn_simulate(1, 2, 2, 0, 0)
    assert s.fraction == pytest.approx(1 / 3) and s.consistent()


@settings(max_examples=30, deadline=None)
@given(w=st.integers(1, 5), b=st.integers(1, 5), s=st.integers(1, 4), draws=st.integers(0, 300),
       seed=st.integers(0, 10**6))
def test_count_identity(w, b, s, draws, seed):
    st_ = urn_simulate(w, b, s, draws, seed, trajectory=True)
    assert st_.total == w + b + draws * s and st_.consistent()
    assert st_.trajectory.size == draws + 1


def test_invalid_urn():
    with pytest.raises(ValueError):
        urn_simulate(0, 2, 2, 10, 0)
    with pytest.raises(ValueError):
        urn_final_counts(1, 2, 2, -1, 5, 0)


def test_beta_params_validation():
    with pytest.raises(ValueError):
        BetaParams(0, 1)


def test_beta_cdf_closed_forms():
    p = BetaParams(0.5, 1)
    assert beta_cdf(p, 0.25) == pytest.approx(0.5, abs=1e-12)
    for a in np.linspace(0, 1, 101):
        assert abs(beta_cdf(p, a) - math.sqrt(a)) <= 1e-10
        assert abs(beta_cdf(BetaParams(0.5, 0.5), a) - arcsine_cdf(a)) <= 1e-10
    assert beta_cdf(BetaParams(0.5, 0.5), 0.5) == pytest.approx(0.5, abs=1e-12)
    assert beta_cdf(BetaParams(3.7, 0.2), 1.0) == 1.0
    assert beta_cdf(BetaParams(3.7, 0.2), 0.0) == 0.0
    with pytest.raises(ValueError):
        beta_cdf(p, 1.5)


@settings(max_examples=300, deadline=None)
@given(p=st.floats(0.05, 50), q=st.floats(0.05, 50), x=st.floats(0, 1))
def test_beta_cdf_matches_scipy(p, q, x):
    assert abs(beta_cdf(BetaParams(p, q), x) - special.betainc(p, q, x)) <= 1e-10


def test_beta_cdf_monotone():
    p = BetaParams(2.5, 0.7)
    vals = [beta_cdf(p, a) for a in np.linspace(0, 1, 500)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_ks_distance_basics():
    n = 200
    grid = (np.arange(n) + 0.5) / n
    assert ks_distance(grid, lambda x: x) == pytest.approx(1 / (2 * n))
    rng = np.random.default_rng(0)
    u = rng.random(20000)
    assert ks_distance(u, lambda x: beta_cdf(BetaParams(1, 1), x)) < ks_critical(u.size)
    with pytest.raises(ValueError):
        ks_distance([], lambda x: x)


def test_urn_limit_is_sqrt():
    # 2000 urns of 2000 draws; the 1e-3 KS critical value is about 0.0435
    w = urn_final_counts(1, 2, 2, 2000, 2000, 3)
    frac = w / (3 + 2 * 2000)
    assert ks_distance(frac, sqrt_cdf) < ks_critical(frac.size)


def test_urn_exact_small_distribution():
    # after k-1 draws the white count is 1 + 2J with J beta-binomial(k-1, 1/2, 1)
    k = 5
    w = urn_final_counts(1, 2, 2, k - 1, 40000, 1)
    j = (w - 1) // 2
    observed = np.bincount(j, minlength=k)
    expected = stats.betabinom(k - 1, 0.5, 1).pmf(np.arange(k)) * w.size
    chi2 = ((observed - expected) ** 2 / expected).sum()
    assert stats.chi2.sf(chi2, k - 1) > 1e-3


def test_face_count_urn_equivalence():
    for k in (3, 5, 8):
        _, p = urn_equivalence_test(k, 6000, 11)
        assert p > 1e-3


def test_grandchild_counts():
    from ranet import generate_standard_subdivision

    _, t = generate_standard_subdivision(2)
    assert grandchild_counts(t).tolist() == [1] * 9
    _, t = generate_ran(4, 0)
    assert grandchild_counts(t).tolist() == [0] * 9
    _, t = generate_ran(2000, 1)
    z = grandchild_counts(t)
    assert z.sum() <= 2 * 2000 - 5


def test_face_split_at_m9():
    # the 2-subdivision is realized with probability 2/35; then every Z_i = 1
    trials = 7000
    (row,) = face_split_experiment([9], 0.01, trials, 0)
    assert row.m == 9
    assert abs(row.realized - 2 / 35) < 4 * math.sqrt((2 / 35) * (33 / 35) / trials)
    assert row.empirical_p == pytest.approx(1 - row.realized)
    assert row.bound == pytest.approx(13 * 0.01**0.25)


def test_face_split_large_m():
    (row,) = face_split_experiment([20001], 0.001, 200, 5)
    assert row.empirical_p < row.bound
    assert row.ks_stat < ks_critical(200)
    with pytest.raises(ValueError):
        face_split_experiment([5], 0.1, 10, 0)


def test_conditional_split_is_arcsine():
    samples, ks, crit = conditional_split_experiment(4001, 0.3, 0.05, 3000, 0)
    assert samples.size > 100
    assert ks < crit
