import math

import numpy as np
import pytest
import scipy.special as sspecial
import scipy.stats as sstats

from cohesion_study import special


def test_log_gamma_grid():
    for x in np.concatenate([np.linspace(0.05, 2, 50), np.linspace(2, 200, 60)]):
        assert special.log_gamma(float(x)) == pytest.approx(
            float(sspecial.gammaln(x)), abs=1e-10, rel=1e-12)


def test_betainc_grid():
    rng = np.random.default_rng(0)
    for _ in range(300):
        a = float(rng.uniform(0.2, 60))
        b = float(rng.uniform(0.2, 60))
        x = float(rng.uniform(0, 1))
        assert special.betainc_reg(a, b, x) == pytest.approx(
            float(sspecial.betainc(a, b, x)), abs=1e-8)


def test_gammainc_grid():
    rng = np.random.default_rng(1)
    for _ in range(300):
        a = float(rng.uniform(0.2, 80))
        x = float(rng.uniform(0, 150))
        assert special.gammainc_lower_reg(a, x) == pytest.approx(
            float(sspecial.gammainc(a, x)), abs=1e-8)


def test_normal_quantile_roundtrip():
    for p in [1e-10, 1e-4, 0.025, 0.3, 0.5, 0.7, 0.975, 1 - 1e-4]:
        z = special.normal_quantile(p)
        assert special.normal_cdf(z) == pytest.approx(p, rel=1e-9, abs=1e-12)


def test_f_tail_at_zero_is_one():
    assert special.f_sf(0.0, 3, 10) == 1.0


def test_chi2_anchor_closed_form():
    # for df=2 the upper tail is exp(-x/2)
    assert special.chi2_sf(2.85, 2) == pytest.approx(math.exp(-2.85 / 2), abs=1e-12)
    assert special.chi2_sf(2.85, 2) == pytest.approx(0.2405, abs=5e-4)


def test_f_anchor_reported_shape():
    assert special.f_sf(5.43, 2, 85.06) == pytest.approx(0.006, abs=5e-4)


def test_f_quantile_inverts_sf():
    for p in [0.005, 0.025, 0.5, 0.975]:
        for df1, df2 in [(2, 10), (5, 85.06), (30, 3)]:
            x = special.f_quantile(p, df1, df2)
            assert special.f_sf(x, df1, df2) == pytest.approx(p, rel=1e-6)


def test_p_monotone_in_statistic():
    xs = np.linspace(0.0, 20.0, 80)
    f_ps = [special.f_sf(float(x), 3, 17) for x in xs]
    chi_ps = [special.chi2_sf(float(x), 4) for x in xs]
    assert all(a >= b for a, b in zip(f_ps, f_ps[1:]))
    assert all(a >= b for a, b in zip(chi_ps, chi_ps[1:]))


def test_studentized_range_vs_scipy():
    for q in [0.5, 1.5, 2.5, 3.5, 5.0, 7.0]:
        for k in [2, 3, 5, 8]:
            for df in [3.0, 8.7, 14.5, 40.0, 120.0]:
                assert special.studentized_range_sf(q, k, df) == pytest.approx(
                    float(sstats.studentized_range.sf(q, k, df)), abs=1e-4)


def test_tail_probability_dispatch():
    assert special.tail_probability("f", 0.0, df1=2, df2=10) == 1.0
    assert special.tail_probability("chi2", 2.85, df=2) == pytest.approx(0.2405, abs=5e-4)
    assert special.tail_probability("studentized_range", 3.0, k=3, df=10) == pytest.approx(
        float(sstats.studentized_range.sf(3.0, 3, 10)), abs=1e-4)
    with pytest.raises(ValueError):
        special.tail_probability("nope", 1.0)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        special.f_sf(1.0, -1, 5)
    with pytest.raises(ValueError):
        special.chi2_sf(1.0, 0)
    with pytest.raises(ValueError):
        special.studentized_range_sf(1.0, 1, 5)
