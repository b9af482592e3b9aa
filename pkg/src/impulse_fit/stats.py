"""Descriptive statistics, R-squared and one-way ANOVA."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError

Z_95 = 1.96


@dataclass(frozen=True)
class GroupSummary:
    """Mean, spread and two 95% intervals for one sample.

    ``ci_mean`` is the normal-approximation interval of the mean;
    ``percentile_interval`` spans the empirical 2.5th to 97.5th percentiles.
    """

    mean: float
    std_dev: float
    ci_mean: tuple
    percentile_interval: tuple
    n: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AnovaResult:
    f_statistic: float
    df_between: int
    df_within: int
    p_value: float

    def as_dict(self) -> dict:
        return asdict(self)


def r_squared(predicted, observed) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``."""
    predicted = np.asarray(predicted, dtype=float)
    observed = np.asarray(observed, dtype=float)
    if predicted.shape != observed.shape or observed.ndim != 1:
        raise DomainError("predicted and observed must be 1-D and of equal length")
    if observed.size < 2:
        raise DomainError("r_squared needs at least two observations")
    ss_tot = np.sum((observed - observed.mean()) ** 2)
    if ss_tot == 0:
        raise DomainError("observed values are all identical")
    ss_res = np.sum((observed - predicted) ** 2)
    return float(1.0 - ss_res / ss_tot)


def summarize(values) -> GroupSummary:
    x = np.asarray(values, dtype=float).reshape(-1)
    if x.size < 2:
        raise DomainError("summarize needs at least two values")
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    half = Z_95 * sd / math.sqrt(x.size)
    lo, hi = np.percentile(x, [2.5, 97.5])
    # keep the interval ordered around the mean under rounding
    ci = (min(mean - half, mean), max(mean + half, mean))
    return GroupSummary(mean, sd, ci, (float(lo), float(hi)), int(x.size))


# regularized incomplete beta ------------------------------------------------

_EPS = 1e-15
_TINY = 1e-300


def _beta_cf(a, b, x, max_iter=10000, rtol=1e-12):
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= rtol * 0.1:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise DomainError("betainc needs a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError("betainc needs 0 <= x <= 1")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def f_sf(f: float, df1: int, df2: int) -> float:
    """Upper tail ``P(F > f)`` of the F distribution."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))


def f_sf_df1_2(f: float, df2: int) -> float:
    """Closed-form upper tail for ``df1 = 2``: ``(1 + 2 f / df2) ** (-df2 / 2)``."""
    if f <= 0:
        return 1.0
    return (1.0 + 2.0 * f / df2) ** (-df2 / 2.0)


def one_way_anova(groups) -> AnovaResult:
    """One-way ANOVA F test for equal group means."""
    groups = [np.asarray(g, dtype=float).reshape(-1) for g in groups]
    if len(groups) < 2:
        raise DomainError("ANOVA needs at least two groups")
    if any(g.size < 2 for g in groups):
        raise DomainError("each ANOVA group needs at least two values")
    k = len(groups)
    n = sum(g.size for g in groups)
    means = [g.mean() for g in groups]
    grand = np.concatenate(groups).mean()
    if all(m == means[0] for m in means):
        ss_between = 0.0
    else:
        ss_between = sum(g.size * (m - grand) ** 2 for g, m in zip(groups, means))
    ss_within = sum(np.sum((g - g.mean()) ** 2) for g in groups)
    df_b, df_w = k - 1, n - k
    ms_b, ms_w = ss_between / df_b, ss_within / df_w
    if ms_w == 0:
        f, p = (math.inf, 0.0) if ms_b > 0 else (0.0, 1.0)
    else:
        f = float(ms_b / ms_w)
        p = f_sf(f, df_b, df_w)
    return AnovaResult(float(f), df_b, df_w, float(p))
