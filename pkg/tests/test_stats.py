import math

import numpy as np
import pytest
from scipy import stats

from tpng import stats as st
from tpng.rng import RandomStream


def rng(seed):
    return np.random.default_rng(seed)


def test_ks_one_sample_statistic_matches_scipy():
    x = np.sort(rng(0).normal(size=300))
    got = st.ks_one_sample(x, stats.norm.cdf)
    ref = stats.kstest(x, "norm")
    assert math.isclose(got.statistic, ref.statistic, rel_tol=1e-12)
    assert abs(got.p_value - ref.pvalue) < 0.03
    assert got.passed


def test_ks_one_sample_rejects_wrong_law():
    x = np.sort(rng(1).exponential(size=500))
    assert not st.ks_one_sample(x, stats.norm.cdf).passed


def test_ks_one_sample_requires_sorted_input():
    with pytest.raises(ValueError):
        st.ks_one_sample([0.3, 0.1, 0.5, 0.2, 0.9, 0.4, 0.6, 0.7], stats.uniform.cdf)


def test_ks_small_sample_is_insufficient():
    res = st.ks_one_sample([0.1, 0.2, 0.3], stats.uniform.cdf)
    assert res.verdict == "insufficient" and res.passed


def test_ks_two_sample_matches_scipy():
    a, b = rng(2).normal(size=400), rng(3).normal(size=350)
    got = st.ks_two_sample(a, b)
    ref = stats.ks_2samp(a, b, method="asymp")
    assert math.isclose(got.statistic, ref.statistic, rel_tol=1e-12)
    assert abs(got.p_value - ref.pvalue) < 0.03


def test_ks_two_sample_detects_shift():
    a, b = rng(4).normal(size=500), rng(5).normal(0.4, 1, size=500)
    assert not st.ks_two_sample(a, b).passed


def test_chi_square_matches_scipy_without_pooling():
    obs = np.array([18, 22, 25, 35])
    exp = np.array([0.2, 0.2, 0.3, 0.3])
    got = st.chi_square_gof(obs, exp)
    ref = stats.chisquare(obs, exp * obs.sum())
    assert math.isclose(got.statistic, ref.statistic)
    assert math.isclose(got.p_value, ref.pvalue)


def test_chi_square_pools_sparse_cells():
    obs = [50, 40, 2, 1, 0]
    exp = [0.5, 0.4, 0.05, 0.03, 0.02]
    res = st.chi_square_gof(obs, exp)
    assert res.verdict in ("pass", "fail") and res.n == 93


def test_chi_square_dimension_mismatch():
    with pytest.raises(ValueError):
        st.chi_square_gof([1, 2, 3], [0.5, 0.5])
    with pytest.raises(ValueError):
        st.chi_square_two_sample([1, 2], [1, 2, 3])


def test_chi_square_ddof_reduces_degrees_of_freedom():
    obs = np.array([30, 25, 20, 25])
    a = st.chi_square_gof(obs, [0.25] * 4)
    b = st.chi_square_gof(obs, [0.25] * 4, ddof=1)
    assert a.statistic == b.statistic and b.p_value < a.p_value


def test_chi_square_two_sample_matches_contingency():
    a = np.array([30, 40, 50, 20])
    b = np.array([35, 38, 45, 30])
    got = st.chi_square_two_sample(a, b)
    ref = stats.chi2_contingency(np.vstack([a, b]), correction=False)
    assert math.isclose(got.statistic, ref.statistic)
    assert math.isclose(got.p_value, ref.pvalue)


def test_dispersion_accepts_poisson():
    counts = rng(6).poisson(4.0, size=200)
    assert st.poisson_dispersion(counts).passed
    assert st.poisson_dispersion(counts, mean=4.0).passed
    assert abs(st.dispersion_index(counts) - 1) < 0.3


def test_dispersion_rejects_constant_and_overdispersed():
    assert not st.poisson_dispersion(np.full(100, 3)).passed
    over = rng(7).negative_binomial(2, 0.3, size=300)
    assert not st.poisson_dispersion(over).passed


def test_dispersion_all_zero_counts():
    assert st.poisson_dispersion(np.zeros(50), mean=0.0).passed
    assert not st.poisson_dispersion(np.r_[np.zeros(49), 1], mean=0.0).passed
    assert st.poisson_dispersion(np.zeros(50)).passed


def test_dispersion_too_few_cells():
    assert st.poisson_dispersion([1, 2, 3]).verdict == "insufficient"


def test_mean_within():
    x = rng(8).normal(10, 2, size=400)
    assert st.mean_within(x, 10).passed
    assert not st.mean_within(x, 11).passed
    assert st.mean_within(x, 10, variance=4.0).passed


def test_pearson_matches_numpy():
    a, b = rng(9).normal(size=100), rng(10).normal(size=100)
    assert math.isclose(st.pearson_r(a, b), np.corrcoef(a, b)[0, 1])
    assert st.pearson_r(np.ones(5), a[:5]) == 0.0


def test_permutation_correlation():
    a = rng(11).normal(size=60)
    assert st.permutation_correlation(a, rng(12).normal(size=60), RandomStream(0, ("perm",))).passed
    assert not st.permutation_correlation(a, a + 0.1 * rng(13).normal(size=60), RandomStream(0, ("perm",))).passed


def test_fisher_matches_scipy():
    p = [0.2, 0.5, 0.03, 0.7]
    got = st.fisher_combine(p)
    ref = stats.combine_pvalues(p, method="fisher")
    assert math.isclose(got.statistic, ref.statistic) and math.isclose(got.p_value, ref.pvalue)
    assert st.fisher_combine([]).verdict == "insufficient"


def test_bonferroni():
    rs = [st.TestResult(0.0, p, 10, "pass") for p in (0.5, 0.003, 0.3)]
    assert not st.bonferroni(rs, 0.01).passed
    rs = [st.TestResult(0.0, p, 10, "pass") for p in (0.5, 0.02, 0.3)]
    assert st.bonferroni(rs, 0.01).passed


TRIALS = 1000
CAL_LEVEL = 0.05


def rejection_rate(make_result):
    return sum(not make_result(r).passed for r in range(TRIALS)) / TRIALS


def within_band(rate):
    return abs(rate - CAL_LEVEL) <= 2 * math.sqrt(CAL_LEVEL * (1 - CAL_LEVEL) / TRIALS)


def test_calibration_ks_one_sample():
    rate = rejection_rate(lambda r: st.ks_one_sample(np.sort(rng(100 + r).uniform(size=100)), stats.uniform.cdf,
                                                     level=CAL_LEVEL))
    assert within_band(rate), rate


def test_calibration_ks_two_sample():
    rate = rejection_rate(lambda r: st.ks_two_sample(rng(2000 + r).normal(size=120), rng(5000 + r).normal(size=150),
                                                     level=CAL_LEVEL))
    assert within_band(rate), rate


def test_calibration_chi_square():
    p = np.array([0.1, 0.2, 0.3, 0.4])
    rate = rejection_rate(lambda r: st.chi_square_gof(rng(8000 + r).multinomial(200, p), p, level=CAL_LEVEL))
    assert within_band(rate), rate


def test_calibration_dispersion():
    rate = rejection_rate(lambda r: st.poisson_dispersion(rng(1000 + r).poisson(5.0, 50), level=CAL_LEVEL))
    assert within_band(rate), rate
