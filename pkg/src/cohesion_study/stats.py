"""Inter-rater agreement and variance-comparison statistics.

Covers the full analysis chain: one-way average-measures intraclass
correlation on possibly ragged rating matrices, median-centered and
means-variant Brown-Forsythe tests, Welch's ANOVA with Games-Howell post
hocs, Kruskal-Wallis, Shapiro-Wilk normality, Bartlett homogeneity,
Bonferroni correction and MSE against expert whole-interaction scores.

Distribution tails come from the in-repo special-function backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from . import special


class StatsError(ValueError):
    """Degenerate or invalid input to a statistical routine."""


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df1: float
    p: float
    df2: float | None = None  # absent for chi-square-type tests


@dataclass(frozen=True)
class IccResult:
    icc: float
    ci_low: float
    ci_high: float
    confidence: float = 0.95


@dataclass(frozen=True)
class RatingMatrix:
    """Per-target observed subscale scores; rows may be ragged."""

    targets: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    dimension: str = "task"

    def __post_init__(self) -> None:
        if len(self.targets) != len(self.values):
            raise StatsError("targets and values must have equal length")
        for t, row in zip(self.targets, self.values):
            if len(row) == 0:
                raise StatsError(f"target {t!r} has no observations")


def _groups_as_arrays(groups: Sequence[Sequence[float]], min_size: int = 2) -> list[np.ndarray]:
    if len(groups) < 2:
        raise StatsError("need at least 2 groups")
    arrs = [np.asarray(g, dtype=float) for g in groups]
    for i, a in enumerate(arrs):
        if a.size < min_size:
            raise StatsError(f"group {i} has fewer than {min_size} values")
    return arrs


# ---------------------------------------------------------------------------
# Intraclass correlation
# ---------------------------------------------------------------------------

def icc_one_way_average(matrix: RatingMatrix, confidence: float = 0.95) -> IccResult:
    """One-way random-effects, average-measures intraclass correlation.

    Handles ragged designs (raters scored subsets of targets) through the
    effective group size k0 = (N - sum(n_i^2)/N) / (n - 1). The confidence
    interval comes from exact F-distribution quantiles mapped through
    (x - 1)/x.
    """
    rows = [np.asarray(r, dtype=float) for r in matrix.values]
    n = len(rows)
    if n < 2:
        raise StatsError("need at least 2 targets")
    sizes = np.array([r.size for r in rows], dtype=float)
    big_n = sizes.sum()
    if not np.any(sizes >= 2):
        raise StatsError("need at least 2 observations on at least one target")
    if big_n <= n:
        raise StatsError("single observation per every target: within variance undefined")
    all_vals = np.concatenate(rows)
    grand = all_vals.mean()
    means = np.array([r.mean() for r in rows])
    ssb = float(np.sum(sizes * (means - grand) ** 2))
    ssw = float(sum(np.sum((r - r.mean()) ** 2) for r in rows))
    msb = ssb / (n - 1)
    msw = ssw / (big_n - n)
    if msw == 0.0 and msb == 0.0:
        raise StatsError("degenerate: zero variance")
    k0 = (big_n - float(np.sum(sizes**2)) / big_n) / (n - 1)
    df1 = n - 1.0
    df2 = n * (k0 - 1.0)
    if msw == 0.0:
        return IccResult(icc=1.0, ci_low=1.0, ci_high=1.0, confidence=confidence)
    f_obs = msb / msw
    alpha = 1.0 - confidence
    f_low = f_obs / special.f_quantile(alpha / 2.0, df1, df2)
    f_high = f_obs * special.f_quantile(alpha / 2.0, df2, df1)
    to_icc = lambda x: (x - 1.0) / x if x > 0 else -math.inf
    return IccResult(
        icc=to_icc(f_obs), ci_low=to_icc(f_low), ci_high=to_icc(f_high),
        confidence=confidence,
    )


# ---------------------------------------------------------------------------
# One-way ANOVA machinery
# ---------------------------------------------------------------------------

def _oneway_f(arrs: list[np.ndarray]) -> tuple[float, float, float]:
    """Classic one-way fixed-effects F with (df1, df2)."""
    g = len(arrs)
    big_n = sum(a.size for a in arrs)
    grand = np.concatenate(arrs).mean()
    ssb = sum(a.size * (a.mean() - grand) ** 2 for a in arrs)
    ssw = sum(float(np.sum((a - a.mean()) ** 2)) for a in arrs)
    df1, df2 = g - 1.0, big_n - g
    if ssw == 0.0 and ssb == 0.0:
        raise StatsError("degenerate: zero variance everywhere")
    if ssw == 0.0:
        return math.inf, df1, df2
    return float((ssb / df1) / (ssw / df2)), df1, df2


def brown_forsythe(groups: Sequence[Sequence[float]], variant: str = "spread") -> TestResult:
    """Brown-Forsythe test.

    variant="spread": one-way ANOVA on |x - group median| (the
    median-centered Levene test of equal spread). variant="means": the
    robust test of equal means with Satterthwaite fractional df2.
    """
    arrs = _groups_as_arrays(groups)
    if variant == "spread":
        zs = [np.abs(a - np.median(a)) for a in arrs]
        if all(float(np.sum(z)) == 0.0 for z in zs):
            raise StatsError("degenerate: all absolute deviations are zero")
        f, df1, df2 = _oneway_f(zs)
        p = special.f_sf(f, df1, df2) if math.isfinite(f) else 0.0
        return TestResult(statistic=f, df1=df1, df2=df2, p=p)
    if variant == "means":
        return _brown_forsythe_means(arrs)
    raise StatsError(f"unknown Brown-Forsythe variant {variant!r}")


def _brown_forsythe_means(arrs: list[np.ndarray]) -> TestResult:
    g = len(arrs)
    sizes = np.array([a.size for a in arrs], dtype=float)
    big_n = sizes.sum()
    means = np.array([a.mean() for a in arrs])
    varis = np.array([a.var(ddof=1) for a in arrs])
    grand = np.concatenate(arrs).mean()
    denom_terms = (1.0 - sizes / big_n) * varis
    denom = float(denom_terms.sum())
    if denom == 0.0:
        raise StatsError("degenerate: zero variance in every group")
    f = float(np.sum(sizes * (means - grand) ** 2)) / denom
    c = denom_terms / denom
    df2 = 1.0 / float(np.sum(c**2 / (sizes - 1.0)))
    df1 = g - 1.0
    return TestResult(statistic=f, df1=df1, df2=df2, p=special.f_sf(f, df1, df2))


def welch_anova(groups: Sequence[Sequence[float]]) -> TestResult:
    """Welch's heteroscedastic one-way ANOVA."""
    arrs = _groups_as_arrays(groups)
    g = len(arrs)
    sizes = np.array([a.size for a in arrs], dtype=float)
    varis = np.array([a.var(ddof=1) for a in arrs])
    if np.any(varis == 0.0):
        raise StatsError("zero within-group variance")
    means = np.array([a.mean() for a in arrs])
    w = sizes / varis
    w_sum = float(w.sum())
    m_w = float(np.sum(w * means)) / w_sum
    a_num = float(np.sum(w * (means - m_w) ** 2)) / (g - 1.0)
    lam = float(np.sum((1.0 - w / w_sum) ** 2 / (sizes - 1.0)))
    b_den = 1.0 + 2.0 * (g - 2.0) / (g**2 - 1.0) * lam
    f = a_num / b_den
    df1 = g - 1.0
    df2 = (g**2 - 1.0) / (3.0 * lam)
    return TestResult(statistic=f, df1=df1, df2=df2, p=special.f_sf(f, df1, df2))


@dataclass(frozen=True)
class PairwiseResult:
    i: int
    j: int
    mean_diff: float
    statistic: float
    df: float
    p: float


def games_howell(groups: Sequence[Sequence[float]]) -> list[PairwiseResult]:
    """Games-Howell post-hoc pairwise comparisons.

    Per pair: Welch-type t with Satterthwaite df, referred to the
    studentized-range distribution with k groups at q = t * sqrt(2).
    """
    arrs = _groups_as_arrays(groups)
    k = len(arrs)
    varis = [float(a.var(ddof=1)) for a in arrs]
    if any(v == 0.0 for v in varis):
        raise StatsError("zero within-group variance")
    out = []
    for i, j in combinations(range(k), 2):
        a, b = arrs[i], arrs[j]
        vi, vj = varis[i] / a.size, varis[j] / b.size
        se = math.sqrt(vi + vj)
        diff = float(a.mean() - b.mean())
        t = abs(diff) / se
        df = (vi + vj) ** 2 / (vi**2 / (a.size - 1) + vj**2 / (b.size - 1))
        p = special.studentized_range_sf(t * math.sqrt(2.0), k, df)
        out.append(PairwiseResult(i=i, j=j, mean_diff=diff, statistic=t, df=df, p=p))
    return out


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> TestResult:
    """Kruskal-Wallis rank test with midrank ties correction."""
    arrs = _groups_as_arrays(groups, min_size=1)
    big_n = sum(a.size for a in arrs)
    if big_n < 3:
        raise StatsError("need at least 3 values in total")
    pooled = np.concatenate(arrs)
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(big_n, dtype=float)
    sorted_vals = pooled[order]
    i = 0
    tie_term = 0.0
    while i < big_n:
        j = i
        while j < big_n and sorted_vals[j] == sorted_vals[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j - 1) + 1.0  # midrank, 1-based
        t = j - i
        tie_term += t**3 - t
        i = j
    correction = 1.0 - tie_term / (big_n**3 - big_n)
    if correction == 0.0:
        raise StatsError("degenerate ties: all values identical")
    h = 0.0
    offset = 0
    for a in arrs:
        r_sum = float(ranks[offset:offset + a.size].sum())
        h += r_sum**2 / a.size
        offset += a.size
    h = 12.0 / (big_n * (big_n + 1.0)) * h - 3.0 * (big_n + 1.0)
    h /= correction
    df = len(arrs) - 1.0
    return TestResult(statistic=h, df1=df, p=special.chi2_sf(h, df))


def bartlett(groups: Sequence[Sequence[float]]) -> TestResult:
    """Bartlett's chi-square test of homogeneity of variances."""
    arrs = _groups_as_arrays(groups)
    g = len(arrs)
    sizes = np.array([a.size for a in arrs], dtype=float)
    varis = np.array([a.var(ddof=1) for a in arrs])
    if np.any(varis <= 0.0):
        raise StatsError("zero within-group variance")
    big_n = sizes.sum()
    sp2 = float(np.sum((sizes - 1.0) * varis)) / (big_n - g)
    stat = float((big_n - g) * math.log(sp2) - np.sum((sizes - 1.0) * np.log(varis)))
    c = 1.0 + (float(np.sum(1.0 / (sizes - 1.0))) - 1.0 / (big_n - g)) / (3.0 * (g - 1.0))
    stat /= c
    df = g - 1.0
    return TestResult(statistic=stat, df1=df, p=special.chi2_sf(stat, df))


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston's AS R94 approximation)
# ---------------------------------------------------------------------------

def _poly(coefs: Sequence[float], x: float) -> float:
    """Evaluate c0 + c1 x + c2 x^2 + ..."""
    return sum(c * x**i for i, c in enumerate(coefs))


def shapiro_wilk(sample: Sequence[float]) -> TestResult:
    """Shapiro-Wilk W test of normality, 3 <= n <= 5000."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if not 3 <= n <= 5000:
        raise StatsError(f"sample size {n} outside 3..5000")
    ss = float(np.sum((x - x.mean()) ** 2))
    if ss == 0.0:
        raise StatsError("zero sample variance")

    m = np.array([special.normal_quantile((i - 0.375) / (n + 0.25)) for i in range(1, n + 1)])
    ssumm2 = float(np.sum(m**2))
    u = 1.0 / math.sqrt(n)
    a = np.zeros(n)
    if n == 3:
        a[0], a[2] = -math.sqrt(0.5), math.sqrt(0.5)
    else:
        cn = m[-1] / math.sqrt(ssumm2)
        an = _poly((cn, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056), u)
        if n > 5:
            cn1 = m[-2] / math.sqrt(ssumm2)
            an1 = _poly((cn1, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633), u)
            phi = (ssumm2 - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (
                1.0 - 2.0 * an**2 - 2.0 * an1**2
            )
            a[2:-2] = m[2:-2] / math.sqrt(phi)
            a[-1], a[-2], a[0], a[1] = an, an1, -an, -an1
        else:
            phi = (ssumm2 - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * an**2)
            a[1:-1] = m[1:-1] / math.sqrt(phi)
            a[-1], a[0] = an, -an
    w = float(np.sum(a * x)) ** 2 / ss
    w = min(w, 1.0)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        p = min(1.0, max(0.0, p))
        return TestResult(statistic=w, df1=float(n), p=p)
    if n <= 11:
        gamma = _poly((-2.273, 0.459), n)
        if gamma <= math.log1p(-w):
            return TestResult(statistic=w, df1=float(n), p=0.0)
        z = -math.log(gamma - math.log1p(-w))
        mu = _poly((0.5440, -0.39978, 0.025054, -0.0006714), n)
        sigma = math.exp(_poly((1.3822, -0.77857, 0.062767, -0.0020322), n))
    else:
        ln_n = math.log(n)
        z = math.log1p(-w)
        mu = _poly((-1.5861, -0.31082, -0.083751, 0.0038915), ln_n)
        sigma = math.exp(_poly((-0.4803, -0.082676, 0.0030302), ln_n))
    p = 1.0 - special.normal_cdf((z - mu) / sigma)
    return TestResult(statistic=w, df1=float(n), p=p)


# ---------------------------------------------------------------------------
# Small helpers
# ---------------------------------------------------------------------------

def bonferroni(p_values: Sequence[float], m: int | None = None) -> list[float]:
    """Bonferroni-adjusted p-values: min(1, m * p)."""
    if m is None:
        m = len(p_values)
    if m < len(p_values):
        raise StatsError("m must be at least the number of comparisons")
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise StatsError(f"p-value {p} outside [0, 1]")
    return [min(1.0, m * p) for p in p_values]


def mse_vs_expert(unit_scores: Sequence[float], expert_score: float) -> float:
    """Mean squared error of per-unit scores against the expert's score."""
    if len(unit_scores) == 0:
        raise StatsError("empty unit score list")
    arr = np.asarray(unit_scores, dtype=float)
    return float(np.mean((arr - expert_score) ** 2))
