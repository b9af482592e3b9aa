"""Banister impulse-response (fitness-fatigue) model.

Performance on day ``t`` is predicted from the loads of all strictly earlier
days::

    p_t = p0 + k1 * sum_{i<t} w_i exp(-(t-i)/r1) - k2 * sum_{i<t} w_i exp(-(t-i)/r2)

Days are 1-based. The fitness term carries a positive sign and the fatigue
term a negative sign, and both exponentials decay with the lag ``t - i``.

Whole-series evaluation runs each term through the first-order recursion
``g[t+1] = a * (g[t] + w[t])`` with ``a = exp(-1/r)`` and ``g[1] = 0``, which
costs O(T) per series instead of the O(T^2) double sum.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from . import _kernels
from .errors import DomainError

PARAM_NAMES = ("p0", "k1", "k2", "r1", "r2")


@dataclass(frozen=True)
class ModelParams:
    """The five impulse-response parameters.

    Attributes
    ----------
    p0 : float
        Baseline performance.
    k1, k2 : float
        Fitness and fatigue gains (>= 0).
    r1, r2 : float
        Fitness and fatigue decay time constants in days (> 0).
    """

    p0: float
    k1: float
    k2: float
    r1: float
    r2: float

    def __post_init__(self):
        _check_params(self.as_array())

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, values) -> "ModelParams":
        values = np.asarray(values, dtype=float)
        if values.shape != (5,):
            raise DomainError(f"expected 5 parameter values, got shape {values.shape}")
        return cls(*(float(v) for v in values))

    def as_dict(self) -> dict:
        return dict(zip(PARAM_NAMES, astuple(self)))


def _check_params(theta: np.ndarray) -> None:
    if not np.all(np.isfinite(theta)):
        raise DomainError(f"non-finite model parameters: {theta}")
    if theta[3] <= 0 or theta[4] <= 0:
        raise DomainError("decay time constants r1 and r2 must be > 0")
    if theta[1] < 0 or theta[2] < 0:
        raise DomainError("gains k1 and k2 must be >= 0")


def as_theta(params) -> np.ndarray:
    """Return a validated float array ``(p0, k1, k2, r1, r2)``."""
    if isinstance(params, ModelParams):
        return params.as_array()
    theta = np.asarray(params, dtype=float)
    if theta.shape != (5,):
        raise DomainError(f"expected 5 parameter values, got shape {theta.shape}")
    _check_params(theta)
    return theta


def as_loads(loads) -> np.ndarray:
    """Return a validated 1-D float array of daily loads."""
    w = np.asarray(loads, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise DomainError("loads must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DomainError("loads must be finite and non-negative")
    return w


def _check_day(t, n_loads: int) -> int:
    if int(t) != t or not 1 <= t <= n_loads + 1:
        raise DomainError(f"day index {t} outside 1..{n_loads + 1}")
    return int(t)


def predict_day(params, loads, t: int) -> float:
    """Predicted performance on day ``t`` (1 <= t <= len(loads) + 1).

    Evaluated by direct summation over the prior days.
    """
    theta = as_theta(params)
    w = as_loads(loads)
    t = _check_day(t, w.size)
    p0, k1, k2, r1, r2 = theta
    lag = t - np.arange(1, t)
    prior = w[: t - 1]
    fitness = np.sum(prior * np.exp(-lag / r1))
    fatigue = np.sum(prior * np.exp(-lag / r2))
    return float(p0 + k1 * fitness - k2 * fatigue)


def gradient_day(params, loads, t: int) -> np.ndarray:
    """Partial derivatives of ``p_t`` with respect to ``(p0, k1, k2, r1, r2)``."""
    theta = as_theta(params)
    w = as_loads(loads)
    t = _check_day(t, w.size)
    _, k1, k2, r1, r2 = theta
    lag = t - np.arange(1, t)
    prior = w[: t - 1]
    e1 = prior * np.exp(-lag / r1)
    e2 = prior * np.exp(-lag / r2)
    return np.array(
        [
            1.0,
            np.sum(e1),
            -np.sum(e2),
            k1 * np.sum(e1 * lag) / r1**2,
            -k2 * np.sum(e2 * lag) / r2**2,
        ]
    )


def decay_sums(w: np.ndarray, tau: float) -> np.ndarray:
    """``G[t] = sum_{i<t} w_i exp(-(t-i)/tau)`` for every day, via the recursion."""
    return _kernels.decay_sums(w, np.exp(-1.0 / tau))


def lagged_decay_sums(g: np.ndarray, tau: float) -> np.ndarray:
    """``H[t] = sum_{i<t} w_i (t-i) exp(-(t-i)/tau)`` from the output of :func:`decay_sums`.

    Uses ``H[t+1] = a * H[t] + G[t+1]``.
    """
    return _kernels.lagged_decay_sums(g, np.exp(-1.0 / tau))


def predict_series(params, loads) -> np.ndarray:
    """Predicted performance for days ``1..T`` in O(T)."""
    theta = as_theta(params)
    w = as_loads(loads)
    p0, k1, k2, r1, r2 = theta
    return p0 + k1 * decay_sums(w, r1) - k2 * decay_sums(w, r2)


def gradient_series(params, loads) -> np.ndarray:
    """Jacobian of :func:`predict_series`, shape ``(T, 5)``."""
    theta = as_theta(params)
    w = as_loads(loads)
    _, k1, k2, r1, r2 = theta
    g1 = decay_sums(w, r1)
    g2 = decay_sums(w, r2)
    jac = np.empty((w.size, 5))
    jac[:, 0] = 1.0
    jac[:, 1] = g1
    jac[:, 2] = -g2
    jac[:, 3] = k1 * lagged_decay_sums(g1, r1) / r1**2
    jac[:, 4] = -k2 * lagged_decay_sums(g2, r2) / r2**2
    return jac
