"""Least-squares cost between model predictions and sparse observations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError
from .model import as_loads, as_theta, decay_sums, lagged_decay_sums, predict_series


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Observed performance values on a subset of days.

    Entries are kept sorted by day. Each day appears at most once.
    """

    days: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        days = np.asarray(self.days, dtype=np.int64).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if days.shape != values.shape:
            raise DomainError("days and values must have equal length")
        if np.any(days < 1):
            raise DomainError("observation days are 1-based")
        if not np.all(np.isfinite(values)):
            raise DomainError("observed values must be finite")
        order = np.argsort(days, kind="stable")
        days, values = days[order], values[order]
        if np.any(np.diff(days) == 0):
            raise DomainError("duplicate observation day")
        days.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "days", days)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pairs(cls, pairs) -> "ObservationSet":
        pairs = list(pairs)
        if not pairs:
            return cls.empty()
        days, values = zip(*pairs)
        return cls(np.array(days), np.array(values, dtype=float))

    @classmethod
    def empty(cls) -> "ObservationSet":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0))

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(d), float(v)) for d, v in zip(self.days, self.values)]

    def __len__(self):
        return int(self.days.size)

    def __eq__(self, other):
        if not isinstance(other, ObservationSet):
            return NotImplemented
        return np.array_equal(self.days, other.days) and np.array_equal(
            self.values, other.values
        )

    def __repr__(self):
        return f"ObservationSet({self.pairs()!r})"


def _residuals(theta, w, obs: ObservationSet) -> np.ndarray:
    if len(obs) == 0:
        raise DomainError("observation set is empty")
    if obs.days[-1] > w.size:
        raise DomainError(f"observation day {obs.days[-1]} beyond {w.size} load days")
    return predict_series(theta, w)[obs.days - 1] - obs.values


def sse(params, loads, obs: ObservationSet) -> float:
    """Sum of squared residuals over the observed days."""
    r = _residuals(as_theta(params), as_loads(loads), obs)
    return float(r @ r)


def sse_gradient(params, loads, obs: ObservationSet) -> np.ndarray:
    """Gradient of :func:`sse` with respect to ``(p0, k1, k2, r1, r2)``."""
    return SseObjective(loads, obs).gradient(as_theta(params))


def holdout_loss(params, loads, holdout_obs: ObservationSet, fit_obs=None) -> float:
    """Sum of squared error on the hold-out observations.

    When ``fit_obs`` is given the two sets must not share any day.
    """
    if fit_obs is not None and np.intersect1d(fit_obs.days, holdout_obs.days).size:
        raise DomainError("fit and hold-out observations share days")
    return sse(params, loads, holdout_obs)


class SseObjective:
    """SSE bound to one load series and observation set, for optimizers.

    Loads past the last observed day cannot influence the cost and are
    dropped up front.
    """

    def __init__(self, loads, obs: ObservationSet):
        w = as_loads(loads)
        if len(obs) == 0:
            raise DomainError("observation set is empty")
        last = int(obs.days[-1])
        if last > w.size:
            raise DomainError(f"observation day {last} beyond {w.size} load days")
        self.loads = np.ascontiguousarray(w[:last])
        self.idx = np.ascontiguousarray(obs.days - 1)
        self.y = np.ascontiguousarray(obs.values)

    def __call__(self, theta) -> float:
        p0, k1, k2, r1, r2 = as_theta(theta)
        return _kernels.sse(self.loads, self.idx, self.y, p0, k1, k2,
                            math.exp(-1.0 / r1), math.exp(-1.0 / r2))

    def gradient(self, theta) -> np.ndarray:
        _, k1, k2, r1, r2 = theta = as_theta(theta)
        g1 = decay_sums(self.loads, r1)
        g2 = decay_sums(self.loads, r2)
        two_r = 2.0 * (self._predict(theta, g1, g2) - self.y)
        h1 = lagged_decay_sums(g1, r1)[self.idx]
        h2 = lagged_decay_sums(g2, r2)[self.idx]
        return np.array(
            [
                two_r.sum(),
                two_r @ g1[self.idx],
                -(two_r @ g2[self.idx]),
                k1 * (two_r @ h1) / r1**2,
                -k2 * (two_r @ h2) / r2**2,
            ]
        )

    def _predict(self, theta, g1, g2):
        p0, k1, k2 = theta[:3]
        return p0 + k1 * g1[self.idx] - k2 * g2[self.idx]

    def predictions(self, theta) -> np.ndarray:
        """Model predictions at the observed days."""
        theta = as_theta(theta)
        return self._predict(theta, decay_sums(self.loads, theta[3]), decay_sums(self.loads, theta[4]))
