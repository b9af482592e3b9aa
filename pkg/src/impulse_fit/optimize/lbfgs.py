"""Limited-memory BFGS with simple bound handling.

Bounds are handled by a projected active-set scheme rather than the full
generalized-Cauchy-point machinery of L-BFGS-B:

* a variable sitting on a bound whose gradient points outward is frozen for
  the current iteration;
* the quasi-Newton direction is computed on the free variables by the
  two-loop recursion;
* the line search never steps past the first bound the direction hits, so
  every iterate is feasible. Reaching that bound with sufficient decrease is
  accepted and the variable becomes active.

Convergence is declared when the infinity norm of the projected gradient
drops below ``tolerance * max(1, |f|)`` or when the relative decrease of the
cost between iterates is below ``tolerance``. Steps that stop at a bound are
exempt from the decrease test.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DomainError
from .result import OptimResult

CONVERGED = "converged"
MAX_EVALS = "max_evals"
MAX_ITERS = "max_iters"
LINE_SEARCH_FAILURE = "line_search_failure"


@dataclass(frozen=True)
class LbfgsConfig:
    bounds: tuple | None = None
    max_function_evaluations: int = 15000
    max_iterations: int = 15000
    history_size: int = 10
    tolerance: float = 1e-11
    c1: float = 1e-4
    c2: float = 0.9
    max_step_trials: int = 20

    def __post_init__(self):
        if self.history_size < 1:
            raise ConfigError("history_size must be >= 1")
        if not 0 < self.c1 < self.c2 < 1:
            raise ConfigError("line search constants need 0 < c1 < c2 < 1")
        if self.max_step_trials < 1:
            raise ConfigError("max_step_trials must be >= 1")
        if self.bounds is not None:
            b = np.asarray(self.bounds, dtype=float)
            if b.ndim != 2 or b.shape[1] != 2 or np.any(b[:, 0] >= b[:, 1]):
                raise ConfigError("each bound needs lower < upper")

    def box(self, dim):
        if self.bounds is None:
            return np.full(dim, -np.inf), np.full(dim, np.inf)
        b = np.asarray(self.bounds, dtype=float)
        if b.shape[0] != dim:
            raise ConfigError(f"{b.shape[0]} bounds for a {dim}-dimensional problem")
        return b[:, 0].copy(), b[:, 1].copy()


def two_loop_direction(gradient, history, gamma=None) -> np.ndarray:
    """Quasi-Newton search direction ``-H g`` from stored ``(s, y)`` pairs.

    ``history`` is ordered oldest first. With an empty history the result is
    ``-gamma * g`` (``gamma`` defaults to 1). Otherwise ``gamma`` defaults to
    ``s.y / y.y`` of the newest pair.
    """
    q = np.array(gradient, dtype=float)
    if not history:
        return -(1.0 if gamma is None else gamma) * q
    rhos = [1.0 / (y @ s) for s, y in history]
    alphas = []
    for (s, y), rho in zip(reversed(history), reversed(rhos)):
        a = rho * (s @ q)
        q -= a * y
        alphas.append(a)
    if gamma is None:
        s, y = history[-1]
        gamma = (s @ y) / (y @ y)
    r = gamma * q
    for (s, y), rho, a in zip(history, rhos, reversed(alphas)):
        b = rho * (y @ r)
        r += s * (a - b)
    return -r


def projected_gradient(x, g, lo, hi) -> np.ndarray:
    """``x - P(x - g)``: zero exactly at a first-order stationary point of the box problem."""
    return x - np.clip(x - g, lo, hi)


def _bound_steps(x, d, lo, hi) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d > 0, (hi - x) / d, np.where(d < 0, (lo - x) / d, np.inf))


def _max_step(x, d, lo, hi) -> float:
    steps = _bound_steps(x, d, lo, hi)
    return float(np.min(steps)) if steps.size else np.inf


def _cubic_min(a, fa, ga, b, fb, gb):
    """Minimizer of the cubic interpolating two points and slopes, or None."""
    d1 = ga + gb - 3 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(disc)
    denom = gb - ga + 2 * d2
    if denom == 0:
        return None
    t = b - (b - a) * (gb + d2 - d1) / denom
    return t if np.isfinite(t) else None


class _LineSearch:
    """Strong-Wolfe search along ``x + alpha d`` for ``alpha`` in ``(0, amax]``."""

    def __init__(self, cost, grad, x, f0, g0, d, lo, hi, config, budget):
        self.cost, self.grad = cost, grad
        self.x, self.d, self.lo, self.hi = x, d, lo, hi
        self.f0, self.dg0 = f0, float(g0 @ d)
        self.c1, self.c2 = config.c1, config.c2
        self.trials_left = config.max_step_trials
        self.budget = budget
        self.nfev = 0
        self.best = None  # (alpha, x, f, g) with sufficient decrease and lowest f

    def point(self, alpha):
        xa = np.clip(self.x + alpha * self.d, self.lo, self.hi)
        # land exactly on the blocking bounds so they register as active
        steps = _bound_steps(self.x, self.d, self.lo, self.hi)
        hit = steps <= alpha
        xa[hit] = np.where(self.d[hit] > 0, self.hi[hit], self.lo[hit])
        return xa

    def phi(self, alpha):
        self.trials_left -= 1
        self.nfev += 1
        xa = self.point(alpha)
        fa = self.cost(xa)
        if not np.isfinite(fa):
            return xa, np.inf, None, np.nan
        ga = np.asarray(self.grad(xa), dtype=float)
        if not np.all(np.isfinite(ga)):
            return xa, np.inf, None, np.nan
        if self.armijo(alpha, fa) and (self.best is None or fa < self.best[2]):
            self.best = (alpha, xa, fa, ga)
        return xa, fa, ga, float(ga @ self.d)

    def armijo(self, alpha, fa):
        return fa <= self.f0 + self.c1 * alpha * self.dg0 and fa < self.f0

    def can_try(self):
        return self.trials_left > 0 and self.nfev < self.budget

    def search(self, alpha, amax):
        """Return ``(alpha, x, f, g)`` or None when no acceptable step exists."""
        alpha = min(alpha, amax)
        a_prev, f_prev, dg_prev = 0.0, self.f0, self.dg0
        first = True
        while self.can_try():
            xa, fa, ga, dga = self.phi(alpha)
            if not self.armijo(alpha, fa) or (not first and fa >= f_prev):
                return self.zoom(a_prev, f_prev, dg_prev, alpha, fa, dga)
            if abs(dga) <= -self.c2 * self.dg0:
                return alpha, xa, fa, ga
            if dga >= 0:
                return self.zoom(alpha, fa, dga, a_prev, f_prev, dg_prev)
            if alpha >= amax:
                return alpha, xa, fa, ga
            a_prev, f_prev, dg_prev = alpha, fa, dga
            alpha = min(2.0 * alpha, amax)
            first = False
        return self.best

    def zoom(self, a_lo, f_lo, g_lo, a_hi, f_hi, g_hi):
        while self.can_try():
            width = abs(a_hi - a_lo)
            if width <= 1e-16 * max(1.0, abs(a_lo)):
                break
            a = None
            if np.isfinite(f_hi) and np.isfinite(g_hi):
                a = _cubic_min(a_lo, f_lo, g_lo, a_hi, f_hi, g_hi)
            lower, upper = min(a_lo, a_hi), max(a_lo, a_hi)
            if a is None:
                a = 0.5 * (a_lo + a_hi)
            else:
                a = min(max(a, lower + 0.1 * width), upper - 0.1 * width)
            xa, fa, ga, dga = self.phi(a)
            if not self.armijo(a, fa) or fa >= f_lo:
                a_hi, f_hi, g_hi = a, fa, dga
            else:
                if abs(dga) <= -self.c2 * self.dg0:
                    return a, xa, fa, ga
                if dga * (a_hi - a_lo) >= 0:
                    a_hi, f_hi, g_hi = a_lo, f_lo, g_lo
                a_lo, f_lo, g_lo = a, fa, dga
        return self.best


def lbfgs_minimize(cost, grad, x0, config: LbfgsConfig | None = None,
                   callback=None) -> OptimResult:
    """Minimize ``cost`` from ``x0`` inside ``config.bounds``.

    ``x0`` is projected onto the box first. Returns an :class:`OptimResult`
    whose ``message`` is one of ``converged``, ``max_evals``, ``max_iters``
    or ``line_search_failure``. ``callback(nit, x, f)`` is called after
    every accepted step.
    """
    config = config or LbfgsConfig()
    x = np.array(x0, dtype=float).reshape(-1)
    lo, hi = config.box(x.size)
    x = np.clip(x, lo, hi)
    f = cost(x)
    g = np.asarray(grad(x), dtype=float)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise DomainError("cost or gradient is not finite at the starting point")
    nfev = 1
    tol = config.tolerance
    history = deque(maxlen=config.history_size)

    nit = 0
    reason = MAX_ITERS
    while True:
        if np.max(np.abs(projected_gradient(x, g, lo, hi)), initial=0.0) <= tol * max(1.0, abs(f)):
            reason = CONVERGED
            break
        if nit >= config.max_iterations:
            reason = MAX_ITERS
            break
        if nfev >= config.max_function_evaluations:
            reason = MAX_EVALS
            break

        free = ~(((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0)))
        gf = np.where(free, g, 0.0)
        d = np.where(free, two_loop_direction(gf, history), 0.0)
        d[((x <= lo) & (d < 0)) | ((x >= hi) & (d > 0))] = 0.0
        if not np.all(np.isfinite(d)) or d @ gf >= 0:
            history.clear()
            d = -gf

        step = None
        for attempt in range(2):
            amax = _max_step(x, d, lo, hi)
            alpha0 = 1.0 if history else min(1.0, 1.0 / np.linalg.norm(d))
            ls = _LineSearch(cost, grad, x, f, g, d, lo, hi, config,
                             config.max_function_evaluations - nfev)
            step = ls.search(alpha0, amax) if amax > 0 else None
            nfev += ls.nfev
            if step is not None or attempt == 1 or nfev >= config.max_function_evaluations:
                break
            # fall back to projected steepest descent once
            if not history:
                break
            history.clear()
            d = -gf

        if step is None:
            reason = MAX_EVALS if nfev >= config.max_function_evaluations else LINE_SEARCH_FAILURE
            break

        alpha, x_new, f_new, g_new = step
        # a step cut short by a bound says nothing about convergence
        truncated = alpha >= amax
        s, y = x_new - x, g_new - g
        if s @ y > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            history.append((s, y))
        decrease = f - f_new
        x, f, g = x_new, f_new, g_new
        nit += 1
        if callback is not None:
            callback(nit, x, f)
        if not truncated and decrease <= tol * max(abs(f), abs(f + decrease), 1.0):
            reason = CONVERGED
            break

    return OptimResult(
        x=x,
        fun=float(f),
        nit=nit,
        nfev=nfev,
        converged=reason == CONVERGED,
        message=reason,
    )
