import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from impulse_fit.errors import DomainError
from impulse_fit.model import (
    ModelParams,
    gradient_day,
    gradient_series,
    predict_day,
    predict_series,
)

from oracles import central_difference, naive_prediction, random_instance

P = ModelParams(p0=300, k1=1, k2=1, r1=10, r2=5)
IMPULSE = [100, 0, 0]


def test_first_day_is_baseline():
    assert predict_day(P, IMPULSE, 1) == 300


def test_equal_terms_cancel():
    params = ModelParams(300, 1, 1, 10, 10)
    loads = [30, 0, 80, 12, 5]
    for t in range(1, 7):
        assert predict_day(params, loads, t) == pytest.approx(300, abs=1e-12)


def test_day_two_hand_value():
    expected = 300 + 100 * math.exp(-0.1) - 100 * math.exp(-0.2)
    assert predict_day(P, IMPULSE, 2) == pytest.approx(expected, rel=1e-14)
    assert predict_day(P, IMPULSE, 2) == pytest.approx(308.6106, abs=1e-4)


def test_series_hand_values():
    expected = [
        300,
        300 + 100 * math.exp(-0.1) - 100 * math.exp(-0.2),
        300 + 100 * math.exp(-0.2) - 100 * math.exp(-0.4),
    ]
    np.testing.assert_allclose(predict_series(P, IMPULSE), expected, rtol=1e-14)
    np.testing.assert_allclose(predict_series(P, IMPULSE), [300, 308.6107, 314.8411], atol=1e-4)


def test_zero_loads_constant():
    np.testing.assert_array_equal(predict_series(ModelParams(250, 2, 3, 40, 9), np.zeros(30)), 250)


def test_single_day_series():
    np.testing.assert_array_equal(predict_series(P, [50]), [300])


def test_day_after_last_load_allowed():
    assert predict_day(P, IMPULSE, 4) == pytest.approx(naive_prediction(P.as_array(), IMPULSE, 4))


@pytest.mark.parametrize("t", [0, 5, -1, 2.5])
def test_day_out_of_range(t):
    with pytest.raises(DomainError):
        predict_day(P, IMPULSE, t)


@pytest.mark.parametrize("theta", [
    [math.nan, 1, 1, 10, 5],
    [300, math.inf, 1, 10, 5],
    [300, 1, 1, 0, 5],
    [300, 1, 1, 10, -2],
    [300, -1, 1, 10, 5],
])
def test_invalid_params(theta):
    with pytest.raises(DomainError):
        predict_series(theta, IMPULSE)
    with pytest.raises(DomainError):
        ModelParams(*theta)


@pytest.mark.parametrize("loads", [[], [1, -2], [np.nan]])
def test_invalid_loads(loads):
    with pytest.raises(DomainError):
        predict_series(P, loads)


def test_recursion_matches_naive_sum(rng):
    for _ in range(100):
        theta, loads = random_instance(rng)
        fast = predict_series(theta, loads)
        slow = [naive_prediction(theta, loads, t) for t in range(1, loads.size + 1)]
        np.testing.assert_allclose(fast, slow, rtol=1e-9)
        t = int(rng.integers(1, loads.size + 1))
        assert predict_day(theta, loads, t) == pytest.approx(slow[t - 1], rel=1e-9)


def test_gradient_first_day():
    np.testing.assert_array_equal(gradient_day(P, IMPULSE, 1), [1, 0, 0, 0, 0])


def test_gradient_day_two_hand_values():
    g = gradient_day(P, IMPULSE, 2)
    expected = [1, 100 * math.exp(-0.1), -100 * math.exp(-0.2),
                100 * math.exp(-0.1) / 100, -100 * math.exp(-0.2) / 25]
    np.testing.assert_allclose(g, expected, rtol=1e-14)
    np.testing.assert_allclose(g, [1, 90.4837, -81.8731, 0.904837, -3.274924], rtol=1e-6)


def _assert_fd_close(analytic, numeric):
    for a, n in zip(analytic, numeric):
        if abs(a) < 1e-8:
            assert abs(n) < 1e-5
        else:
            assert a == pytest.approx(n, rel=1e-5)


def test_gradient_matches_finite_differences(rng):
    for _ in range(100):
        theta, loads = random_instance(rng)
        t = int(rng.integers(1, loads.size + 2))
        g = gradient_day(theta, loads, t)
        fd = central_difference(lambda th: naive_prediction(th, loads, t), theta)
        _assert_fd_close(g, fd)


def test_gradient_series_matches_day_form(rng):
    for _ in range(30):
        theta, loads = random_instance(rng)
        jac = gradient_series(theta, loads)
        for t in range(1, loads.size + 1):
            np.testing.assert_allclose(jac[t - 1], gradient_day(theta, loads, t),
                                       rtol=1e-9, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    day=st.integers(0, 39),
    bump=st.floats(0.1, 500),
)
def test_more_load_never_lowers_fitness_only_response(seed, day, bump):
    rng = np.random.default_rng(seed)
    theta = np.array([280, rng.uniform(0.01, 3), 0.0, rng.uniform(1, 80), 10.0])
    loads = rng.uniform(0, 150, 40)
    base = predict_series(theta, loads)
    loads[day] += bump
    bumped = predict_series(theta, loads)
    assert np.all(bumped[day + 1:] >= base[day + 1:])
    np.testing.assert_array_equal(bumped[: day + 1], base[: day + 1])


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_prepending_rest_day_shifts_series(seed):
    theta, loads = random_instance(np.random.default_rng(seed))
    shifted = predict_series(theta, np.concatenate([[0.0], loads]))
    np.testing.assert_allclose(shifted[1:], predict_series(theta, loads), rtol=1e-12)
    assert shifted[0] == theta[0]


def test_params_roundtrip():
    assert ModelParams.from_array(P.as_array()) == P
    assert P.as_dict() == {"p0": 300, "k1": 1, "k2": 1, "r1": 10, "r2": 5}
