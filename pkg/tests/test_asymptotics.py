import math

import mpmath
import numpy as np
import pytest

from ranet.asymptotics import (
    AnalyticContext,
    SeriesFamily,
    W_apply,
    Wh,
    b_of,
    bisect,
    build_context,
    constant_c,
    detect_k0,
    eta_constants,
    g_eval,
    gamma_mgf,
    h_eval,
    h_prime,
    mgf_mixture,
    psi_constant,
    rho_distances,
    rho_from_sup,
    rho_k,
    sequence_abc,
    sequence_abc_recurrence,
    solve_xhat,
    sup_value,
    zeta_integral,
    zeta_region_mass,
)
from ranet.core import InvalidStateError

GRID = np.linspace(0.1, 0.2, 41)


def test_h_values_and_pole():
    assert h_eval(0.1) == pytest.approx(0.015 - 0.006 / 0.9, abs=1e-15)
    assert h_eval(0.1) == pytest.approx(0.0083333, abs=1e-7)
    with pytest.raises(ValueError):
        h_eval(0.5)
    with pytest.raises(ValueError):
        h_eval(0.6)


def test_h_is_the_alpha_series():
    x = 0.15
    partial = [g_eval(SeriesFamily(k, "under"), x) for k in (10, 20, 40, 60)]
    errs = [abs(h_eval(x) - p) for p in partial]
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 1e-15


def test_h_prime_matches_finite_difference():
    for x in GRID:
        fd = (h_eval(x + 1e-6) - h_eval(x - 1e-6)) / 2e-6
        assert h_prime(x) == pytest.approx(fd, abs=1e-6)


def test_W_values():
    assert Wh(0.1) == pytest.approx(1.762, abs=1e-3)
    assert Wh(0.2) == pytest.approx(-0.831, abs=1e-3)
    with pytest.raises(ValueError):
        W_apply(lambda x: -1.0, lambda x: 0.0, 0.15)


def test_derivative_of_first_W_term():
    def term(x):
        return x * (x - 1) * h_prime(x) / h_eval(x)

    for x in GRID:
        fd = (term(x + 1e-6) - term(x - 1e-6)) / 2e-6
        assert fd == pytest.approx(4 * x * (x - 1) / (1 - 2 * x) ** 2, abs=1e-6)


def test_Wh_strictly_decreasing():
    vals = [Wh(x) for x in np.linspace(0.1, 0.2, 1000)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_xhat_and_c():
    res = solve_xhat(1e-10)
    assert res.root == pytest.approx(0.1629562, abs=1e-6)
    assert res.width <= 1e-10
    assert res.iterations <= math.ceil(math.log2(0.1 / 1e-10))
    assert abs(Wh(res.root)) < 1e-8
    c = constant_c()
    assert c == pytest.approx(1.668, abs=1e-3)
    assert 1 - 1 / res.root < 0 and math.log(h_eval(res.root)) < 0
    assert abs(constant_c(1e-10) - constant_c(1e-8)) < 1e-6


def test_bisect_contract():
    with pytest.raises(InvalidStateError):
        bisect(lambda x: x * x + 1, -1, 1, 1e-6)
    with pytest.raises(ValueError):
        bisect(lambda x: x, -1, 1, 0)
    res = bisect(lambda x: x - 0.3, 0, 1, 1e-12)
    assert res.lo <= 0.3 <= res.hi


def test_sequences():
    assert sequence_abc(2) == (0, 3, 6)
    assert sequence_abc(3) == (6, 3, 18)
    for i in range(2, 41):
        assert sequence_abc(i) == sequence_abc_recurrence(i)
    with pytest.raises(ValueError):
        sequence_abc(1)


def test_branching_factors():
    assert b_of(SeriesFamily(3, "under")) == 6
    assert b_of(SeriesFamily(3, "over")) == 87
    for k in range(3, 30):
        assert b_of(SeriesFamily(k, "under")) == 3 * (2**k - 4) - 6 * (k - 2)
    with pytest.raises(ValueError):
        b_of(SeriesFamily(None, "limit-h"))


def test_family_monotonicity():
    for k in range(3, 40):
        lo, lo1 = SeriesFamily(k, "under"), SeriesFamily(k + 1, "under")
        hi, hi1 = SeriesFamily(k, "over"), SeriesFamily(k + 1, "over")
        for x in GRID:
            assert g_eval(lo, x) <= g_eval(lo1, x)
            assert g_eval(hi, x) >= g_eval(hi1, x)
            assert g_eval(lo, x) <= h_eval(x) * (1 + 1e-12) and g_eval(hi, x) >= h_eval(x) * (1 - 1e-12)


def test_family_derivative():
    fam = SeriesFamily(12, "over")
    for x in GRID:
        fd = (fam.value(x + 1e-7) - fam.value(x - 1e-7)) / 2e-7
        assert fam.derivative(x) == pytest.approx(fd, rel=1e-6)


def test_mgf():
    fam = SeriesFamily(10, "under")
    assert mgf_mixture(fam, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert b_of(fam) * mgf_mixture(fam, -5) == pytest.approx(g_eval(fam, 1 / 6), abs=1e-12)
    for lam in np.linspace(-9, -4, 11):
        for kind in ("under", "over"):
            f = SeriesFamily(15, kind)
            assert b_of(f) * mgf_mixture(f, lam) == pytest.approx(g_eval(f, 1 / (1 - lam)), rel=1e-12)
    assert gamma_mgf(3, -1) == pytest.approx(1 / 8)
    with pytest.raises(ValueError):
        mgf_mixture(fam, 1.0)


def test_k0_and_below_threshold_error():
    k0 = detect_k0("under")
    assert 3 < k0 < 20
    with pytest.raises(InvalidStateError, match="first valid k"):
        rho_k(k0 - 1, "under")


@pytest.mark.parametrize("kind", ["under", "over"])
@pytest.mark.parametrize("k", [10, 20, 40])
def test_rho_two_routes(k, kind):
    r = rho_k(k, kind)
    assert 0.1 < r.x < 0.2
    assert r.stationarity_residual < 1e-8
    fam = SeriesFamily(k, kind)
    assert rho_from_sup(fam) == pytest.approx(r.rho, abs=1e-6)
    value, lam = sup_value(fam, r.rho)
    assert value == pytest.approx(math.log(b_of(fam)), abs=1e-6)
    assert -9 <= lam <= -4
    at_lam = (1 - 1 / r.x) / r.rho - math.log(mgf_mixture(fam, 1 - 1 / r.x))
    assert at_lam == pytest.approx(math.log(b_of(fam)), abs=1e-6)


def test_rho_converges_to_c():
    c = constant_c()
    assert abs(rho_k(50, "under").rho - c) < 1e-12
    assert abs(rho_k(50, "over").rho - c) < 1e-12
    for kind in ("under", "over"):
        d = rho_distances([10, 20, 40, 60], kind)
        assert all(a > b for a, b in zip(d, d[1:]))


def test_other_constants():
    assert psi_constant() == pytest.approx(0.152, abs=1e-3)
    eta1, eta2 = eta_constants()
    assert eta1 == 6 / 11
    assert eta2 == pytest.approx(7.081, abs=1e-3)
    assert math.exp(1 / eta2) == pytest.approx(3 * math.e / eta2, rel=1e-9)


def test_zeta_integral():
    assert zeta_integral(0.88) > 1 / 6
    assert zeta_integral(1e-9) == pytest.approx(2 * zeta_region_mass(), abs=1e-6)
    vals = [zeta_integral(z) for z in np.linspace(0.05, 1.0, 12)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        zeta_integral(0.0)


def test_zeta_integral_matches_plain_quadrature():
    from scipy import integrate

    z = 0.5
    f1 = lambda t: 0.5 / math.sqrt(t)
    f2 = lambda s: 1 / (math.pi * math.sqrt(s * (1 - s)))

    def inner(t):
        top = min(1.0, t / (1 - t)) if t < 1 else 1.0
        v, _ = integrate.quad(lambda s: (t**z + (s * (1 - t)) ** z) * f2(s), 0.5, top, limit=200)
        return v * f1(t)

    a, _ = integrate.quad(inner, 1 / 3, 0.5, limit=200)
    b, _ = integrate.quad(inner, 0.5, 1.0, limit=200)
    assert zeta_integral(z) == pytest.approx(a + b, abs=1e-6)


def test_context_roundtrip():
    ctx = build_context(k_max=12)
    again = AnalyticContext.from_dict(__import__("json").loads(ctx.to_json()))
    assert again == ctx
    assert abs(constant_c(xhat=ctx.xhat) - ctx.c) < 1e-12
    names = [r[0] for r in ctx.report_rows()]
    assert {"xhat", "c", "psi", "eta1", "eta2"} <= set(names)
    for row in ctx.table:
        assert 0.1 < row.x_under < 0.2 and 0.1 < row.x_over < 0.2


def test_high_precision_distances_are_precision_stable():
    a = rho_distances([20, 40], "over", dps=60)
    b = rho_distances([20, 40], "over", dps=90)
    for x, y in zip(a, b):
        assert abs(x - y) < mpmath.mpf(10) ** -40
