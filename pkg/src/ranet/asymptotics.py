"""Analytic constants behind the radius and diameter growth rate.

Notation:

* ``h(x) = 12x^3/(1-2x) - 6x^3/(1-x)``, the generating function of the
  type-1 counts ``alpha_i`` below the root.
* ``W f(x) = x(x-1) f'(x)/f(x) - log f(x)``.
* ``xhat`` is the root of ``W h`` in ``(0.1, 0.2)`` and
  ``c = (1 - 1/xhat) / log h(xhat)`` is the growth constant.
* ``g_k`` (``under``) and ``gbar_k`` (``over``) are the truncated and boosted
  polynomials; ``rho_k`` solves the same stationarity problem with
  ``g_k`` in place of ``h``.

Everything runs in double precision except :func:`rho_distances`, which
needs more digits because ``rho_k`` reaches ``c`` to machine precision
well before ``k = 40``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import mpmath
from scipy import integrate, optimize

from ranet.core import InvalidStateError

__all__ = [
    "AnalyticContext",
    "BisectResult",
    "KTableRow",
    "SeriesFamily",
    "W_apply",
    "b_of",
    "bisect",
    "build_context",
    "constant_c",
    "detect_k0",
    "eta_constants",
    "g_eval",
    "h_eval",
    "h_prime",
    "mgf_mixture",
    "psi_constant",
    "rho_distances",
    "rho_k",
    "rho_from_sup",
    "sequence_abc",
    "solve_xhat",
    "sup_value",
    "zeta_integral",
    "zeta_region_mass",
]

LO, HI = 0.1, 0.2
DEFAULT_TOL = 1e-10
KINDS = ("under", "over", "limit-h")


@dataclass(frozen=True)
class BisectResult:
    root: float
    lo: float
    hi: float
    iterations: int

    @property
    def width(self) -> float:
        return self.hi - self.lo


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float) -> BisectResult:
    """Plain bisection; the bracket straddles a sign change at every step."""
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return BisectResult(lo, lo, lo, 0)
    if fhi == 0:
        return BisectResult(hi, hi, hi, 0)
    if (flo > 0) == (fhi > 0):
        raise InvalidStateError(f"no sign change on [{lo}, {hi}]: f = {flo:.6g}, {fhi:.6g}")
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        it += 1
        if fm == 0:
            return BisectResult(mid, mid, mid, it)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return BisectResult(0.5 * (lo + hi), lo, hi, it)


# --- h and the W operator -------------------------------------------------


def _check_x(x: float) -> None:
    if x >= 0.5 or abs(1 - 2 * x) < 1e-9:
        raise ValueError(f"x = {x} is at or beyond the pole at 1/2")
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")


def h_eval(x: float) -> float:
    _check_x(x)
    x3 = x**3
    return 12 * x3 / (1 - 2 * x) - 6 * x3 / (1 - x)


def h_prime(x: float) -> float:
    _check_x(x)
    a, b = 1 - 2 * x, 1 - x
    return 36 * x * x / a + 24 * x**3 / (a * a) - 18 * x * x / b - 6 * x**3 / (b * b)


def W_apply(f: Callable[[float], float], f_prime: Callable[[float], float], x: float) -> float:
    fx = f(x)
    if not fx > 0:
        raise ValueError(f"W needs f(x) > 0; got f({x}) = {fx}")
    return x * (x - 1) * f_prime(x) / fx - math.log(fx)


def Wh(x: float) -> float:
    return W_apply(h_eval, h_prime, x)


def solve_xhat(tol: float = DEFAULT_TOL) -> BisectResult:
    return bisect(Wh, LO, HI, tol)


def constant_c(tol: float = DEFAULT_TOL, xhat: float | None = None) -> float:
    x = solve_xhat(tol).root if xhat is None else xhat
    return (1 - 1 / x) / math.log(h_eval(x))


# --- alpha/beta/gamma and the polynomial families -------------------------


def sequence_abc(i: int) -> tuple[int, int, int]:
    """Type-1/2/3 counts at depth ``i`` below a type-1 node with no type-1 in between."""
    if i < 2:
        raise ValueError(f"i must be >= 2, got {i}")
    return 3 * 2 ** (i - 1) - 6, 3, 3 * 2**i - 6


def sequence_abc_recurrence(i: int) -> tuple[int, int, int]:
    if i < 2:
        raise ValueError(f"i must be >= 2, got {i}")
    a, b, g = 0, 3, 6
    for _ in range(i - 2):
        a, b, g = g, b, 2 * b + 2 * g
    return a, b, g


@dataclass(frozen=True)
class SeriesFamily:
    """``g_k`` (``under``), ``gbar_k`` (``over``) or the limit ``h``.

    ``coeffs[i]`` is the coefficient of ``x**i``; ``b`` is the sum of the
    coefficients, i.e. the branching factor of the reduced type-1 tree.
    """

    k: int | None
    kind: str = "under"
    coeffs: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind == "limit-h":
            object.__setattr__(self, "coeffs", ())
            return
        if self.k is None or self.k < 3:
            raise ValueError(f"k must be >= 3, got {self.k}")
        c = [0, 0, 0] + [sequence_abc(i)[0] for i in range(3, self.k + 1)]
        if self.kind == "over":
            _, beta, gamma = sequence_abc(self.k)
            c[self.k] += 3 * beta + 4 * gamma
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def b(self) -> int | None:
        return None if self.kind == "limit-h" else sum(self.coeffs)

    def value(self, x: float) -> float:
        if self.kind == "limit-h":
            return h_eval(x)
        acc = 0.0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def derivative(self, x: float) -> float:
        if self.kind == "limit-h":
            return h_prime(x)
        acc = 0.0
        for i in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * x + i * self.coeffs[i]
        return acc

    def W(self, x: float) -> float:
        return W_apply(self.value, self.derivative, x)


def g_eval(family: SeriesFamily, x: float) -> float:
    return family.value(x)


def b_of(family: SeriesFamily) -> int:
    if family.b is None:
        raise ValueError("the limit family has no finite branching factor")
    return family.b


def mgf_mixture(family: SeriesFamily, lam: float) -> float:
    """``E[exp(lam * E_k)]`` for the Gamma mixture with weights ``coeffs / b``."""
    if lam >= 1:
        raise ValueError(f"the mixture MGF needs lam < 1, got {lam}")
    b = b_of(family)
    y = 1.0 / (1.0 - lam)
    return sum(a * y**i for i, a in enumerate(family.coeffs) if a) / b


def gamma_mgf(s: int, lam: float) -> float:
    if lam >= 1:
        raise ValueError(f"the Gamma MGF needs lam < 1, got {lam}")
    return (1.0 - lam) ** (-s)


# --- rho_k -----------------------------------------------------------------


def _sign_change(fam: SeriesFamily) -> bool:
    return fam.W(LO) > 0 and fam.W(HI) < 0


@lru_cache(maxsize=None)
def detect_k0(variant: str, k_max: int = 200) -> int:
    """Smallest ``k`` from which ``W g_k`` changes sign on ``[0.1, 0.2]`` up to ``k_max``."""
    k0 = None
    for k in range(k_max, 2, -1):
        if _sign_change(SeriesFamily(k, variant)):
            k0 = k
        else:
            break
    if k0 is None:
        raise InvalidStateError(f"no sign change for {variant} up to k = {k_max}")
    return k0


@dataclass(frozen=True)
class RhoResult:
    k: int
    variant: str
    x: float
    rho: float
    stationarity_residual: float
    iterations: int


def rho_k(k: int, variant: str = "under", tol: float = DEFAULT_TOL) -> RhoResult:
    """Root ``x_k`` of ``W g`` and ``rho_k = (1 - 1/x_k) / log g(x_k)``.

    Also returns the residual of ``x^2 g'(x)/g(x) = 1/rho`` at the root.
    """
    if variant not in ("under", "over"):
        raise ValueError("variant must be 'under' or 'over'")
    fam = SeriesFamily(k, variant)
    if not _sign_change(fam):
        raise InvalidStateError(
            f"W g has no sign change on [0.1, 0.2] for {variant} k={k}; first valid k is {detect_k0(variant)}"
        )
    res = bisect(fam.W, LO, HI, tol)
    x = res.root
    gx = fam.value(x)
    rho = (1 - 1 / x) / math.log(gx)
    resid = abs(x * x * fam.derivative(x) / gx - 1 / rho)
    return RhoResult(k, variant, x, rho, resid, res.iterations)


def sup_value(fam: SeriesFamily, rho: float, lam_lo: float = -60.0) -> tuple[float, float]:
    """``sup_{lam <= 0} lam/rho - log E[exp(lam E)]`` and its maximizer."""

    def neg(lam):
        return -(lam / rho - math.log(mgf_mixture(fam, lam)))

    out = optimize.minimize_scalar(neg, bounds=(lam_lo, 0.0), method="bounded",
                                   options={"xatol": 1e-12, "maxiter": 500})
    return -out.fun, out.x


def rho_from_sup(fam: SeriesFamily, bracket: tuple[float, float] = (0.5, 5.0)) -> float:
    """Solve ``sup(...) = log b`` for ``rho``; the left side increases with ``rho``."""
    logb = math.log(b_of(fam))
    return optimize.brentq(lambda r: sup_value(fam, r)[0] - logb, *bracket, xtol=1e-14, rtol=1e-14)


def rho_distances(ks, variant: str, dps: int = 60) -> list[mpmath.mpf]:
    """``|rho_k - c|`` for each ``k``, computed with ``dps`` significant digits."""
    with mpmath.workdps(dps):
        def hp_h(x):
            return 12 * x**3 / (1 - 2 * x) - 6 * x**3 / (1 - x)

        def hp_W(f, x):
            return x * (x - 1) * mpmath.diff(f, x) / f(x) - mpmath.log(f(x))

        xh = mpmath.findroot(lambda x: hp_W(hp_h, x), (mpmath.mpf(LO), mpmath.mpf(HI)), solver="anderson")
        c = (1 - 1 / xh) / mpmath.log(hp_h(xh))
        out = []
        for k in ks:
            coeffs = SeriesFamily(k, variant).coeffs

            def g(x, coeffs=coeffs):
                return mpmath.polyval(list(reversed(coeffs)), x)

            xk = mpmath.findroot(lambda x: hp_W(g, x), (mpmath.mpf(LO), mpmath.mpf(HI)), solver="anderson")
            rho = (1 - 1 / xk) / mpmath.log(g(xk))
            out.append(abs(rho - c))
        return out


# --- other constants ------------------------------------------------------


def psi_constant(tol: float = DEFAULT_TOL) -> float:
    """Root of ``2 psi log(3e / (2 psi)) = 1``; the left side increases on ``(0, 1.5]``."""
    return bisect(lambda p: 2 * p * math.log(3 * math.e / (2 * p)) - 1, 1e-12, 1.5, tol).root


def eta_constants(tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """``(6/11, eta2)`` where ``eta2 > 1`` solves ``exp(1/x) = 3e/x``."""
    eta2 = bisect(lambda x: 1 / x - 1 - math.log(3) + math.log(x), 1.0, 100.0, tol).root
    return 6 / 11, eta2


def _theta_top(t: float) -> float:
    return math.asin(math.sqrt(min(1.0, t / (1 - t)))) if t < 0.5 else math.pi / 2


def zeta_integral(zeta: float, epsabs: float = 1e-10) -> float:
    """Double integral of ``[t^z + (s(1-t))^z] f1(t) f2(s)`` over the split region.

    ``f1 = Beta(1/2, 1)`` and ``f2 = Beta(1/2, 1/2)`` densities.  With
    ``s = sin^2(theta)`` the arcsine density becomes the constant ``2/pi``.
    """
    if not 0 < zeta <= 1:
        raise ValueError(f"zeta must lie in (0, 1], got {zeta}")

    def inner(t):
        th0, th1 = math.pi / 4, _theta_top(t)
        if th1 <= th0:
            return 0.0
        part2, _ = integrate.quad(lambda th: math.sin(th) ** (2 * zeta), th0, th1, epsabs=epsabs, epsrel=1e-12)
        val = t**zeta * (th1 - th0) + (1 - t) ** zeta * part2
        return (2 / math.pi) * val * 0.5 / math.sqrt(t)

    total = 0.0
    for a, b in ((1 / 3, 0.5), (0.5, 1.0)):
        v, _ = integrate.quad(inner, a, b, epsabs=epsabs, epsrel=1e-12, limit=200)
        total += v
    return total


def zeta_region_mass() -> float:
    """Probability mass of the integration region under ``f1 x f2`` (arcsine CDF inner)."""

    def F2(u):
        return (2 / math.pi) * math.asin(math.sqrt(u))

    def outer(t):
        return 0.5 / math.sqrt(t) * (F2(min(1.0, t / (1 - t)) if t < 1 else 1.0) - 0.5)

    a, _ = integrate.quad(outer, 1 / 3, 0.5, epsabs=1e-13)
    b, _ = integrate.quad(outer, 0.5, 1.0, epsabs=1e-13)
    return a + b


# --- aggregated context -----------------------------------------------------


@dataclass(frozen=True)
class KTableRow:
    k: int
    x_under: float
    x_over: float
    rho_under: float
    rho_over: float
    b_under: int
    b_over: int


@dataclass(frozen=True)
class AnalyticContext:
    xhat: float
    c: float
    psi: float
    eta1: float
    eta2: float
    Wh_01: float
    Wh_02: float
    zeta: float
    zeta_integral: float
    k0: int
    table: tuple[KTableRow, ...]
    tol: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["table"] = [asdict(r) for r in self.table]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyticContext":
        d = dict(d)
        d["table"] = tuple(KTableRow(**r) for r in d["table"])
        return cls(**d)

    def report_rows(self):
        """``(name, value, definition, tolerance)`` rows for the constants table."""
        tol = self.tol
        yield "xhat", self.xhat, "root of Wh on (0.1, 0.2)", tol
        yield "c", self.c, "(1 - 1/xhat) / log h(xhat)", tol
        yield "psi", self.psi, "2 psi log(3e / (2 psi)) = 1", tol
        yield "eta1", self.eta1, "6/11", 0.0
        yield "eta2", self.eta2, "exp(1/x) = 3e/x with x > 1", tol
        yield "Wh(0.1)", self.Wh_01, "x(x-1)h'/h - log h at 0.1", 0.0
        yield "Wh(0.2)", self.Wh_02, "x(x-1)h'/h - log h at 0.2", 0.0
        yield f"zeta_integral({self.zeta})", self.zeta_integral, "split-region double integral, must exceed 1/6", 1e-10
        for r in self.table:
            yield f"rho_under[{r.k}]", r.rho_under, "(1 - 1/x_k) / log g_k(x_k), W g_k(x_k) = 0", tol
            yield f"rho_over[{r.k}]", r.rho_over, "(1 - 1/x_k) / log gbar_k(x_k), W gbar_k(x_k) = 0", tol


def build_context(tol: float = DEFAULT_TOL, k_max: int = 60, zeta: float = 0.88) -> AnalyticContext:
    xhat = solve_xhat(tol).root
    eta1, eta2 = eta_constants(tol)
    k0 = max(detect_k0("under"), detect_k0("over"))
    rows = []
    for k in range(k0, k_max + 1):
        u, o = rho_k(k, "under", tol), rho_k(k, "over", tol)
        rows.append(KTableRow(k, u.x, o.x, u.rho, o.rho, b_of(SeriesFamily(k, "under")), b_of(SeriesFamily(k, "over"))))
    return AnalyticContext(
        xhat=xhat,
        c=constant_c(xhat=xhat),
        psi=psi_constant(tol),
        eta1=eta1,
        eta2=eta2,
        Wh_01=Wh(LO),
        Wh_02=Wh(HI),
        zeta=zeta,
        zeta_integral=zeta_integral(zeta),
        k0=k0,
        table=tuple(rows),
        tol=tol,
    )
