import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from impulse_fit import stats
from impulse_fit.errors import DomainError


def test_r_squared_cases():
    assert stats.r_squared([1, 2, 3], [1, 2, 3]) == 1
    assert stats.r_squared([2, 2, 2], [1, 2, 3]) == 0
    obs = np.array([4.0, 9.0, 1.0, 7.0])
    assert stats.r_squared(np.full(4, obs.mean()), obs) == pytest.approx(0, abs=1e-15)


def test_r_squared_errors():
    with pytest.raises(DomainError):
        stats.r_squared([1, 2], [3, 3])
    with pytest.raises(DomainError):
        stats.r_squared([1], [1])
    with pytest.raises(DomainError):
        stats.r_squared([1, 2, 3], [1, 2])


def test_r_squared_permutation_invariant(rng):
    pred, obs = rng.normal(size=20), rng.normal(size=20)
    perm = rng.permutation(20)
    assert stats.r_squared(pred[perm], obs[perm]) == pytest.approx(stats.r_squared(pred, obs))


def test_summarize_hand_values():
    s = stats.summarize([1, 2, 3])
    assert (s.mean, s.std_dev, s.n) == (2, 1, 3)
    half = 1.96 / math.sqrt(3)
    assert s.ci_mean == pytest.approx((2 - half, 2 + half))


def test_summarize_constant():
    s = stats.summarize([4.5] * 7)
    assert (s.mean, s.std_dev) == (4.5, 0)
    assert s.ci_mean == (4.5, 4.5)
    assert s.percentile_interval == (4.5, 4.5)


def test_percentile_interval_linear_interpolation():
    s = stats.summarize(np.arange(1, 101))
    assert s.percentile_interval == pytest.approx((3.475, 97.525))


def test_summarize_needs_two_values():
    with pytest.raises(DomainError):
        stats.summarize([1.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200))
def test_percentile_interval_within_range(values):
    s = stats.summarize(values)
    lo, hi = s.percentile_interval
    assert min(values) <= lo <= hi <= max(values)
    assert s.ci_mean[0] <= s.mean <= s.ci_mean[1]


def test_anova_hand_example():
    res = stats.one_way_anova([[1, 2, 3], [2, 3, 4], [3, 4, 5]])
    assert res.f_statistic == pytest.approx(3.0, abs=1e-12)
    assert (res.df_between, res.df_within) == (2, 6)
    assert stats.f_sf_df1_2(res.f_statistic, res.df_within) == 0.125
    assert res.p_value == pytest.approx(0.125, abs=1e-10)


def test_anova_identical_groups():
    res = stats.one_way_anova([[1.5, 2.25, 7.0]] * 3)
    assert res.f_statistic == 0
    assert res.p_value == 1


def test_anova_degenerate_within():
    res = stats.one_way_anova([[1, 1], [2, 2]])
    assert res.f_statistic == math.inf and res.p_value == 0
    res = stats.one_way_anova([[3, 3], [3, 3]])
    assert res.f_statistic == 0 and res.p_value == 1


def test_anova_errors():
    with pytest.raises(DomainError):
        stats.one_way_anova([[1, 2, 3]])
    with pytest.raises(DomainError):
        stats.one_way_anova([[1, 2], [3]])


def test_anova_matches_scipy(rng):
    for _ in range(50):
        k = int(rng.integers(2, 6))
        groups = [rng.normal(rng.normal(0, 1), 1, int(rng.integers(2, 40))) for _ in range(k)]
        ours = stats.one_way_anova(groups)
        ref = scipy.stats.f_oneway(*groups)
        assert ours.f_statistic == pytest.approx(ref.statistic, rel=1e-10)
        assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    scale=st.floats(0.01, 100).map(lambda a: a if a else 1.0),
    sign=st.sampled_from([-1, 1]),
    shift=st.floats(-1e3, 1e3),
)
def test_anova_affine_invariance(seed, scale, sign, shift):
    rng = np.random.default_rng(seed)
    groups = [rng.normal(i * 0.3, 1, 15) for i in range(3)]
    base = stats.one_way_anova(groups)
    moved = stats.one_way_anova([sign * scale * g + shift for g in groups])
    assert moved.f_statistic == pytest.approx(base.f_statistic, rel=1e-7)


def test_betainc_matches_scipy(rng):
    for _ in range(500):
        a, b = rng.uniform(0.05, 800, 2)
        x = rng.random()
        assert stats.betainc(a, b, x) == pytest.approx(
            scipy.special.betainc(a, b, x), rel=1e-10, abs=1e-300)


def test_betainc_edges():
    assert stats.betainc(2, 3, 0) == 0
    assert stats.betainc(2, 3, 1) == 1
    with pytest.raises(DomainError):
        stats.betainc(0, 1, 0.5)
    with pytest.raises(DomainError):
        stats.betainc(1, 1, 1.5)


def test_closed_form_matches_incomplete_beta(rng):
    for _ in range(500):
        f = float(rng.exponential(5))
        df2 = int(rng.integers(1, 3000))
        assert stats.f_sf(f, 2, df2) == pytest.approx(stats.f_sf_df1_2(f, df2), rel=1e-10, abs=1e-300)
