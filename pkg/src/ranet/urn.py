"""Two-colour Eggenberger-Pólya urn, Beta CDF and face-split experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ranet.core import generate_ran

__all__ = [
    "BetaParams",
    "FaceSplitRow",
    "UrnState",
    "beta_cdf",
    "conditional_split_experiment",
    "face_split_experiment",
    "grandchild_counts",
    "ks_critical",
    "ks_distance",
    "urn_equivalence_test",
    "urn_final_counts",
    "urn_simulate",
]


@dataclass(frozen=True)
class UrnState:
    initial_white: int
    initial_black: int
    white: int
    black: int
    step: int
    draws: int
    trajectory: np.ndarray | None = None

    @property
    def total(self) -> int:
        return self.white + self.black

    @property
    def fraction(self) -> float:
        return self.white / self.total

    def consistent(self) -> bool:
        return (
            self.white > 0
            and self.black > 0
            and self.total == self.initial_white + self.initial_black + self.draws * self.step
        )


@dataclass(frozen=True)
class BetaParams:
    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError(f"Beta parameters must be positive, got p={self.p}, q={self.q}")


def _check_urn(w: int, b: int, s: int, draws: int) -> None:
    if w < 1 or b < 1 or s < 1 or draws < 0:
        raise ValueError(f"need w, b, s >= 1 and draws >= 0; got w={w}, b={b}, s={s}, draws={draws}")


def urn_final_counts(w: int, b: int, s: int, draws: int, trials: int, seed: int) -> np.ndarray:
    """Final white counts of ``trials`` independent urns, simulated exactly.

    The total after ``k`` draws is the same for every urn, so each step is
    one vectorized integer draw in ``[0, total)``.
    """
    _check_urn(w, b, s, draws)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    white = np.full(trials, w, dtype=np.int64)
    total = w + b
    for _ in range(draws):
        white += s * (rng.integers(0, total, size=trials) < white)
        total += s
    return white


def urn_simulate(w: int, b: int, s: int, draws: int, seed: int, *, trajectory: bool = False) -> UrnState:
    _check_urn(w, b, s, draws)
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, np.arange(draws) * s + (w + b)) if draws else np.empty(0, dtype=np.int64)
    white, total = w, w + b
    traj = np.empty(draws + 1) if trajectory else None
    if traj is not None:
        traj[0] = w / (w + b)
    for i, u in enumerate(picks.tolist()):
        if u < white:
            white += s
        total += s
        if traj is not None:
            traj[i + 1] = white / total
    return UrnState(w, b, white, total - white, s, draws, traj)


def _betacf(a: float, b: float, x: float, eps: float = 1e-16, max_iter: int = 10_000) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def beta_cdf(params: BetaParams, alpha: float) -> float:
    """Regularized incomplete beta ``I_alpha(p, q)``.

    Uses the continued fraction directly for ``alpha <= p/(p+q)`` and the
    symmetry ``I_x(p, q) = 1 - I_{1-x}(q, p)`` above it.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    p, q = params.p, params.q
    if alpha == 0.0:
        return 0.0
    if alpha == 1.0:
        return 1.0
    log_front = (
        math.lgamma(p + q) - math.lgamma(p) - math.lgamma(q) + p * math.log(alpha) + q * math.log1p(-alpha)
    )
    front = math.exp(log_front)
    if alpha <= p / (p + q):
        return front * _betacf(p, q, alpha) / p
    return 1.0 - front * _betacf(q, p, 1.0 - alpha) / q


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov sup distance between the empirical CDF and ``cdf``."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("samples must be nonempty")
    return float(stats.kstest(x, np.vectorize(cdf, otypes=[float])).statistic)


def ks_critical(n: int, significance: float = 1e-3) -> float:
    """Distribution-free one-sample KS critical value at the given level."""
    return float(stats.kstwo.ppf(1.0 - significance, n))


def sqrt_cdf(x: float) -> float:
    """CDF of Beta(1/2, 1)."""
    return math.sqrt(min(max(x, 0.0), 1.0))


def arcsine_cdf(x: float) -> float:
    """CDF of Beta(1/2, 1/2)."""
    return (2.0 / math.pi) * math.asin(math.sqrt(min(max(x, 0.0), 1.0)))


# --- face-split experiments -------------------------------------------------


def _n_for_faces(m: int) -> int:
    # a RAN has 2n - 5 faces, so odd m is hit exactly and even m rounds down
    return (m + 5) // 2


def grandchild_counts(tree) -> np.ndarray:
    """Faces inside the nine triangles of the root's standard 2-subdivision.

    A child of the root that was never subdivided contributes three zeros:
    its standard sub-triangles are not faces and contain none.
    """
    counts = tree.leaf_counts
    out = np.zeros(9, dtype=np.int64)
    if tree.children[0] < 0:
        return out
    for i, child in enumerate(range(int(tree.children[0]), int(tree.children[0]) + 3)):
        base = int(tree.children[child])
        if base >= 0:
            out[3 * i:3 * i + 3] = counts[base:base + 3]
    return out


@dataclass(frozen=True)
class FaceSplitRow:
    m: int
    eps: float
    trials: int
    empirical_p: float
    bound: float
    ks_stat: float
    realized: float

    FIELDS = ("m", "eps", "trials", "empirical_p", "bound_13_eps_quarter", "ks_stat")

    def row(self) -> tuple:
        return (self.m, self.eps, self.trials, self.empirical_p, self.bound, self.ks_stat)


def face_split_experiment(m_values, eps: float, trials: int, seed: int) -> list[FaceSplitRow]:
    """Empirical ``P(min Z_i / m < eps)`` per ``m``; trial ``i`` uses ``seed + i``.

    ``ks_stat`` compares the face fraction of the root's first child with
    the Beta(1/2, 1) CDF.  ``realized`` is the share of trials in which all
    three children of the root were subdivided.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for m in m_values:
        if m < 9:
            raise ValueError(f"m must be >= 9, got {m}")
        n = _n_for_faces(int(m))
        m_eff = 2 * n - 5
        hits = 0
        realized = 0
        frac = np.empty(trials)
        for i in range(trials):
            g, t = generate_ran(n, seed + i)
            z = grandchild_counts(t)
            realized += bool(z.min() > 0)
            hits += bool(z.min() / m_eff < eps)
            frac[i] = t.leaf_counts[1] / m_eff
        rows.append(FaceSplitRow(m_eff, eps, trials, hits / trials, 13 * eps**0.25,
                                 ks_distance(frac, sqrt_cdf), realized / trials))
    return rows


def conditional_split_experiment(m: int, t: float, width: float, trials: int, seed: int):
    """Samples of ``X2 / (m - X1)`` over trials with ``|X1/m - t| <= width``.

    ``X_i`` is the face count of the root's ``i``-th child.  Returns the
    samples, their KS distance to the arcsine CDF and the 1e-3 critical value.
    """
    n = _n_for_faces(m)
    m_eff = 2 * n - 5
    out = []
    for i in range(trials):
        _, tree = generate_ran(n, seed + i)
        x1, x2 = int(tree.leaf_counts[1]), int(tree.leaf_counts[2])
        if abs(x1 / m_eff - t) <= width:
            out.append(x2 / (m_eff - x1))
    samples = np.asarray(out)
    if samples.size == 0:
        return samples, math.nan, math.nan
    return samples, ks_distance(samples, arcsine_cdf), ks_critical(samples.size)


def urn_equivalence_test(k: int, trials: int, seed: int) -> tuple[float, float]:
    """Chi-square homogeneity between RAN child face counts and the (1, 2, 2) urn.

    The RAN side subdivides the outer triangle ``k`` times and counts faces
    in its first child; the urn side makes ``k - 1`` draws.  Sparse bins are
    pooled so that every pooled column holds at least ten observations.
    Returns ``(statistic, p_value)``.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    ran = np.array([generate_ran(3 + k, seed + i)[1].leaf_counts[1] for i in range(trials)])
    urn = urn_final_counts(1, 2, 2, k - 1, trials, seed + trials)
    support = np.arange(1, 2 * k, 2)
    a = np.array([(ran == v).sum() for v in support])
    b = np.array([(urn == v).sum() for v in support])
    cols_a, cols_b = [], []
    acc_a = acc_b = 0
    for x, y in zip(a, b):
        acc_a += x
        acc_b += y
        if acc_a + acc_b >= 10:
            cols_a.append(acc_a)
            cols_b.append(acc_b)
            acc_a = acc_b = 0
    if acc_a + acc_b and cols_a:
        cols_a[-1] += acc_a
        cols_b[-1] += acc_b
    table = np.array([cols_a, cols_b])
    res = stats.chi2_contingency(table, correction=False)
    return float(res.statistic), float(res.pvalue)
