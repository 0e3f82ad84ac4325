"""Oracle suite: every statistic is checked against an independent
implementation (scipy where it exists, textbook formulas coded here
otherwise) on seeded random datasets, plus the hand-computed spec anchors."""

import csv
import math

import numpy as np
import pytest
import scipy.stats as sstats

from cohesion_study.stats import (
    IccResult,
    RatingMatrix,
    StatsError,
    bartlett,
    bonferroni,
    brown_forsythe,
    games_howell,
    icc_one_way_average,
    kruskal_wallis,
    mse_vs_expert,
    shapiro_wilk,
    welch_anova,
)

N_SEEDS = 100


def random_groups(seed, n_groups=None, low=3, high=30, spread=True):
    rng = np.random.default_rng(seed)
    g = n_groups or int(rng.integers(2, 5))
    out = []
    for i in range(g):
        n = int(rng.integers(low, high))
        scale = float(rng.uniform(0.5, 3.0)) if spread else 1.0
        out.append(rng.normal(float(rng.uniform(-2, 2)), scale, size=n).tolist())
    return out


# -- ICC --------------------------------------------------------------------

def oracle_icc_balanced(matrix, alpha=0.05):
    """Shrout-Fleiss one-way average-measures, direct mean-square formulas."""
    m = np.asarray(matrix, dtype=float)
    n, k = m.shape
    grand = m.mean()
    msb = k * np.sum((m.mean(axis=1) - grand) ** 2) / (n - 1)
    msw = np.sum((m - m.mean(axis=1, keepdims=True)) ** 2) / (n * (k - 1))
    f = msb / msw
    icc = (f - 1) / f
    f_u = sstats.f.isf(alpha / 2, n - 1, n * (k - 1))
    f_l = sstats.f.isf(alpha / 2, n * (k - 1), n - 1)
    lo = (f / f_u - 1) / (f / f_u)
    hi = (f * f_l - 1) / (f * f_l)
    return icc, lo, hi


def test_icc_perfect_agreement():
    m = RatingMatrix(targets=("a", "b", "c"), values=((1.0, 1.0), (2.0, 2.0), (3.0, 3.0)))
    res = icc_one_way_average(m)
    assert res.icc == 1.0
    assert res.ci_low == res.ci_high == 1.0


def test_icc_degenerate_zero_variance():
    m = RatingMatrix(targets=("a", "b", "c"), values=((1.0, 1.0),) * 3)
    with pytest.raises(StatsError, match="zero variance"):
        icc_one_way_average(m)


def test_icc_single_observation_everywhere():
    m = RatingMatrix(targets=("a", "b"), values=((1.0,), (2.0,)))
    with pytest.raises(StatsError):
        icc_one_way_average(m)


def test_icc_fixture_vs_oracle(fixtures_dir):
    rows = []
    with open(fixtures_dir / "icc_6x3.csv") as fh:
        for row in csv.DictReader(fh):
            rows.append([float(row["r1"]), float(row["r2"]), float(row["r3"])])
    res = icc_one_way_average(
        RatingMatrix(targets=tuple(f"u{i}" for i in range(6)),
                     values=tuple(tuple(r) for r in rows))
    )
    icc, lo, hi = oracle_icc_balanced(rows)
    assert res.icc == pytest.approx(icc, abs=1e-9)
    assert res.ci_low == pytest.approx(lo, abs=1e-9)
    assert res.ci_high == pytest.approx(hi, abs=1e-9)


def test_icc_oracle_suite():
    for seed in range(N_SEEDS):
        rng = np.random.default_rng(1000 + seed)
        n, k = int(rng.integers(4, 12)), int(rng.integers(2, 6))
        m = rng.normal(rng.uniform(1, 5, size=(n, 1)), 0.5, size=(n, k))
        res = icc_one_way_average(
            RatingMatrix(targets=tuple(map(str, range(n))),
                         values=tuple(tuple(row) for row in m))
        )
        icc, lo, hi = oracle_icc_balanced(m)
        assert res.icc == pytest.approx(icc, abs=1e-6)
        assert res.ci_low == pytest.approx(lo, abs=1e-6)
        assert res.ci_high == pytest.approx(hi, abs=1e-6)
        assert res.ci_low <= res.icc <= res.ci_high <= 1.0


def test_icc_identical_columns_is_one():
    rng = np.random.default_rng(3)
    col = rng.uniform(1, 5, size=8)
    m = np.column_stack([col, col, col])
    res = icc_one_way_average(
        RatingMatrix(targets=tuple(map(str, range(8))),
                     values=tuple(tuple(r) for r in m))
    )
    assert res.icc == 1.0


# -- Brown-Forsythe ---------------------------------------------------------

def test_bf_shift_invariance():
    res = brown_forsythe([[1, 2, 3], [11, 12, 13]])
    assert res.statistic == pytest.approx(0.0, abs=1e-12)


def test_bf_hand_example():
    # z-profiles {4,0,4} and {1,0,1}
    z1, z2 = [4.0, 0.0, 4.0], [1.0, 0.0, 1.0]
    w, p = sstats.f_oneway(z1, z2)
    res = brown_forsythe([[1, 5, 9], [4, 5, 6]])
    assert res.statistic == pytest.approx(w, abs=1e-9)
    assert res.p == pytest.approx(p, abs=1e-9)


def test_bf_degenerate():
    with pytest.raises(StatsError, match="degenerate"):
        brown_forsythe([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])


def test_bf_spread_oracle_suite():
    for seed in range(N_SEEDS):
        groups = random_groups(seed)
        w, p = sstats.levene(*groups, center="median")
        res = brown_forsythe(groups)
        assert res.statistic == pytest.approx(w, abs=1e-6)
        assert res.p == pytest.approx(p, abs=1e-6)


def oracle_bf_means(groups):
    """Brown-Forsythe robust test of means, textbook formula."""
    ns = np.array([len(g) for g in groups], dtype=float)
    means = np.array([np.mean(g) for g in groups])
    varis = np.array([np.var(g, ddof=1) for g in groups])
    big_n = ns.sum()
    grand = np.concatenate(groups).mean()
    denom_terms = (1 - ns / big_n) * varis
    f = np.sum(ns * (means - grand) ** 2) / denom_terms.sum()
    c = denom_terms / denom_terms.sum()
    df2 = 1.0 / np.sum(c**2 / (ns - 1))
    return f, len(groups) - 1, df2, sstats.f.sf(f, len(groups) - 1, df2)


def test_bf_means_oracle_suite():
    for seed in range(N_SEEDS):
        groups = random_groups(seed + 7)
        f, df1, df2, p = oracle_bf_means(groups)
        res = brown_forsythe(groups, variant="means")
        assert res.statistic == pytest.approx(f, abs=1e-6)
        assert res.df2 == pytest.approx(df2, abs=1e-6)
        assert res.p == pytest.approx(p, abs=1e-6)


def test_bf_means_reports_fractional_df2():
    res = brown_forsythe(random_groups(0, n_groups=3), variant="means")
    assert res.df1 == 2
    assert res.df2 != int(res.df2)


# -- Welch ANOVA ------------------------------------------------------------

def oracle_welch(groups):
    ns = np.array([len(g) for g in groups], dtype=float)
    means = np.array([np.mean(g) for g in groups])
    varis = np.array([np.var(g, ddof=1) for g in groups])
    g = len(groups)
    w = ns / varis
    mw = np.sum(w * means) / w.sum()
    a = np.sum(w * (means - mw) ** 2) / (g - 1)
    lam = np.sum((1 - w / w.sum()) ** 2 / (ns - 1))
    f = a / (1 + 2 * (g - 2) / (g**2 - 1) * lam)
    df2 = (g**2 - 1) / (3 * lam)
    return f, g - 1, df2, sstats.f.sf(f, g - 1, df2)


def test_welch_identical_groups():
    res = welch_anova([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p == pytest.approx(1.0, abs=1e-12)


def test_welch_hand_example():
    groups = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [10.0, 20.0, 30.0]]
    f, df1, df2, p = oracle_welch(groups)
    res = welch_anova(groups)
    assert res.statistic == pytest.approx(f, abs=1e-9)
    assert res.df2 == pytest.approx(df2, abs=1e-9)
    assert res.p == pytest.approx(p, abs=1e-9)


def test_welch_zero_variance_group():
    with pytest.raises(StatsError):
        welch_anova([[1.0, 1.0, 1.0], [2.0, 3.0, 4.0]])


def test_welch_oracle_suite():
    for seed in range(N_SEEDS):
        groups = random_groups(seed + 31)
        f, _, df2, p = oracle_welch(groups)
        res = welch_anova(groups)
        assert res.statistic == pytest.approx(f, abs=1e-6)
        assert res.df2 == pytest.approx(df2, abs=1e-6)
        assert res.p == pytest.approx(p, abs=1e-6)


# -- Games-Howell -----------------------------------------------------------

def oracle_games_howell(groups):
    k = len(groups)
    out = {}
    for i in range(k):
        for j in range(i + 1, k):
            a, b = np.asarray(groups[i]), np.asarray(groups[j])
            vi, vj = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
            t = abs(a.mean() - b.mean()) / math.sqrt(vi + vj)
            df = (vi + vj) ** 2 / (vi**2 / (a.size - 1) + vj**2 / (b.size - 1))
            out[(i, j)] = float(sstats.studentized_range.sf(t * math.sqrt(2), k, df))
    return out


def test_gh_identical_pair():
    groups = [[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [5.0, 6.0, 9.0]]
    res = games_howell(groups)
    first = next(r for r in res if (r.i, r.j) == (0, 1))
    assert first.mean_diff == 0.0
    assert first.p == pytest.approx(1.0, abs=1e-9)


def test_gh_pair_count():
    for k in (2, 3, 4, 5):
        groups = random_groups(k, n_groups=k)
        assert len(games_howell(groups)) == k * (k - 1) // 2


def test_gh_oracle_suite():
    for seed in range(N_SEEDS):
        groups = random_groups(seed + 57, n_groups=3)
        oracle = oracle_games_howell(groups)
        for r in games_howell(groups):
            assert r.p == pytest.approx(oracle[(r.i, r.j)], abs=1e-4)


# -- Kruskal-Wallis ---------------------------------------------------------

def test_kw_hand_ranks():
    groups = [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]
    h, p = sstats.kruskal(*groups)
    res = kruskal_wallis(groups)
    assert res.statistic == pytest.approx(h, abs=1e-9)
    assert res.p == pytest.approx(p, abs=1e-9)
    # hand computation: rank sums 3, 7, 11 over N=6
    h_hand = 12 / (6 * 7) * (3**2 / 2 + 7**2 / 2 + 11**2 / 2) - 3 * 7
    assert res.statistic == pytest.approx(h_hand, abs=1e-12)


def test_kw_identical_groups_zero():
    res = kruskal_wallis([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
    assert res.statistic == pytest.approx(0.0, abs=1e-12)


def test_kw_all_tied_degenerate():
    with pytest.raises(StatsError, match="ties"):
        kruskal_wallis([[2.0, 2.0], [2.0, 2.0]])


def test_kw_reported_shape():
    res = kruskal_wallis([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    assert res.df1 == 2
    assert res.df2 is None


def test_kw_oracle_suite_with_ties():
    for seed in range(N_SEEDS):
        rng = np.random.default_rng(seed)
        groups = [np.round(rng.uniform(0, 5, size=int(rng.integers(3, 20))), 1).tolist()
                  for _ in range(int(rng.integers(2, 5)))]
        if len(set(np.concatenate(groups).tolist())) == 1:
            continue
        h, p = sstats.kruskal(*groups)
        res = kruskal_wallis(groups)
        assert res.statistic == pytest.approx(h, abs=1e-6)
        assert res.p == pytest.approx(p, abs=1e-6)


# -- Shapiro-Wilk -----------------------------------------------------------

def test_sw_seeded_normal_sample():
    rng = np.random.default_rng(12)
    sample = rng.normal(0, 1, size=12).tolist()
    w, p = sstats.shapiro(sample)
    res = shapiro_wilk(sample)
    assert res.statistic == pytest.approx(w, abs=1e-4)
    assert res.p == pytest.approx(p, abs=1e-4)


def test_sw_constant_sample_rejected():
    with pytest.raises(StatsError):
        shapiro_wilk([2.0, 2.0, 2.0, 2.0])


def test_sw_three_point_symmetric():
    res = shapiro_wilk([-1.0, 0.0, 1.0])
    assert res.statistic <= 1.0


def test_sw_out_of_range_n():
    with pytest.raises(StatsError):
        shapiro_wilk([1.0, 2.0])


def test_sw_oracle_suite():
    for seed in range(N_SEEDS):
        rng = np.random.default_rng(seed + 99)
        n = int(rng.integers(4, 60))
        if rng.random() < 0.5:
            sample = rng.normal(0, 1, size=n)
        else:
            sample = rng.exponential(2.0, size=n)
        w, p = sstats.shapiro(sample)
        res = shapiro_wilk(sample.tolist())
        assert res.statistic == pytest.approx(w, abs=1e-4)
        assert res.p == pytest.approx(p, abs=1e-4)


# -- Bartlett ---------------------------------------------------------------

def test_bartlett_equal_variances():
    res = bartlett([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p == pytest.approx(1.0, abs=1e-12)


def test_bartlett_hand_example():
    groups = [[1.0, 2.0, 3.0], [1.0, 4.0, 7.0]]
    w, p = sstats.bartlett(*groups)
    res = bartlett(groups)
    assert res.statistic == pytest.approx(w, abs=1e-9)
    assert res.p == pytest.approx(p, abs=1e-9)


def test_bartlett_df():
    for g in (2, 3, 5):
        res = bartlett(random_groups(g, n_groups=g))
        assert res.df1 == g - 1


def test_bartlett_oracle_suite():
    for seed in range(N_SEEDS):
        groups = random_groups(seed + 13)
        w, p = sstats.bartlett(*groups)
        res = bartlett(groups)
        assert res.statistic == pytest.approx(w, abs=1e-6)
        assert res.p == pytest.approx(p, abs=1e-6)


# -- helpers ----------------------------------------------------------------

def test_bonferroni_arithmetic():
    assert bonferroni([0.01, 0.04], 3) == [pytest.approx(0.03), pytest.approx(0.12)]
    assert bonferroni([0.5], 3) == [1.0]
    assert bonferroni([0.005], 3) == [pytest.approx(0.015)]


def test_bonferroni_m_too_small():
    with pytest.raises(StatsError):
        bonferroni([0.1, 0.2, 0.3], 2)


def test_mse_examples():
    assert mse_vs_expert([3.0, 3.0, 3.0], 3.0) == 0.0
    assert mse_vs_expert([2.0, 4.0], 3.0) == 1.0
    assert mse_vs_expert([5.0], 1.0) == 16.0
    with pytest.raises(StatsError):
        mse_vs_expert([], 3.0)


# -- invariants -------------------------------------------------------------

def test_scale_equivariance():
    groups = random_groups(5, n_groups=3)
    scaled = [[7.5 * x for x in g] for g in groups]
    assert brown_forsythe(groups).statistic == pytest.approx(
        brown_forsythe(scaled).statistic, rel=1e-9)
    assert welch_anova(groups).statistic == pytest.approx(
        welch_anova(scaled).statistic, rel=1e-9)
    assert bartlett(groups).statistic == pytest.approx(
        bartlett(scaled).statistic, rel=1e-9)


def test_kw_monotone_transform_invariance():
    groups = random_groups(8, n_groups=3)
    transformed = [[math.exp(x) for x in g] for g in groups]
    assert kruskal_wallis(groups).statistic == pytest.approx(
        kruskal_wallis(transformed).statistic, abs=1e-9)


def test_all_p_values_in_unit_interval():
    for seed in range(20):
        groups = random_groups(seed + 200)
        for res in (brown_forsythe(groups), welch_anova(groups),
                    bartlett(groups), kruskal_wallis(groups)):
            assert 0.0 <= res.p <= 1.0
