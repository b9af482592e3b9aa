"""Differential Evolution over box-constrained real vectors.

Each generation builds one trial vector per member from the population as it
stood at the start of the generation (synchronous update), then applies greedy
selection in index order. Supported strategies are ``best1bin`` (default) and
``rand1bin``. The mutation factor is dithered: a fresh ``F`` is drawn from
``mutation_range`` once per generation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DomainError
from .result import OptimResult

STRATEGIES = ("best1bin", "rand1bin")


@dataclass(frozen=True)
class DeConfig:
    bounds: tuple
    max_iterations: int = 1000
    population_size: int = 20
    tolerance: float = 1e-11
    atol: float = 0.0
    mutation_range: tuple = (0.5, 1.0)
    recombination: float = 0.7
    strategy: str = "best1bin"
    rng_seed: int = 0
    polish: bool = False

    def __post_init__(self):
        bounds = np.asarray(self.bounds, dtype=float)
        if bounds.ndim != 2 or bounds.shape[1] != 2 or bounds.shape[0] < 1:
            raise ConfigError("bounds must be a sequence of (lower, upper) pairs")
        if not np.all(np.isfinite(bounds)) or np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ConfigError("each bound needs finite lower < upper")
        lo, hi = self.mutation_range
        if not 0 <= lo <= hi <= 2:
            raise ConfigError("mutation_range must satisfy 0 <= low <= high <= 2")
        if not 0 <= self.recombination <= 1:
            raise ConfigError("recombination must lie in [0, 1]")
        if self.population_size < 4:
            raise ConfigError("population_size must be >= 4")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be >= 0")
        if self.tolerance < 0 or self.atol < 0:
            raise ConfigError("tolerances must be >= 0")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.bounds, dtype=float)[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.bounds, dtype=float)[:, 1]

    @property
    def dim(self) -> int:
        return len(self.bounds)


@dataclass
class Population:
    members: np.ndarray
    energies: np.ndarray = field(default=None)

    def __post_init__(self):
        self.members = np.atleast_2d(np.asarray(self.members, dtype=float))
        if self.energies is not None:
            self.energies = np.asarray(self.energies, dtype=float)

    def __len__(self):
        return self.members.shape[0]

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.energies))


def random_population(config: DeConfig, rng: np.random.Generator) -> np.ndarray:
    """Members drawn uniformly inside the bounds."""
    lo, hi = config.lower, config.upper
    return lo + rng.random((config.population_size, config.dim)) * (hi - lo)


def _evaluate(cost, members) -> np.ndarray:
    energies = np.empty(len(members))
    for i, x in enumerate(members):
        e = cost(x)
        energies[i] = e if np.isfinite(e) else np.inf
    return energies


def _donors(rng, n, k) -> np.ndarray:
    """``k`` distinct indices per row ``i``, none equal to ``i``."""
    keys = rng.random((n, n))
    np.fill_diagonal(keys, np.inf)
    return np.argsort(keys, axis=1)[:, :k]


def mutate(base, x_a, x_b, F):
    """Donor vector ``base + F * (x_a - x_b)``."""
    return base + F * (x_a - x_b)


def de_generation_step(population: Population, cost, config: DeConfig,
                       rng: np.random.Generator) -> Population:
    """Run one generation and return the next population.

    The random stream is consumed in a fixed order (F, donor indices,
    crossover mask, forced crossover dimension, repair draws) so a given
    generator state always yields the same result.
    """
    n, dim = population.members.shape
    if n < 4:
        raise ConfigError("population_size must be >= 4")
    if dim != config.dim:
        raise ConfigError(f"population dimension {dim} != bounds dimension {config.dim}")
    x = population.members
    e = population.energies

    F = rng.uniform(*config.mutation_range)
    if config.strategy == "best1bin":
        idx = _donors(rng, n, 2)
        base = np.broadcast_to(x[np.argmin(e)], x.shape)
        mutant = mutate(base, x[idx[:, 0]], x[idx[:, 1]], F)
    else:
        idx = _donors(rng, n, 3)
        mutant = mutate(x[idx[:, 0]], x[idx[:, 1]], x[idx[:, 2]], F)

    cross = rng.random((n, dim)) < config.recombination
    cross[np.arange(n), rng.integers(dim, size=n)] = True
    trial = np.where(cross, mutant, x)

    lo, hi = config.lower, config.upper
    resample = lo + rng.random((n, dim)) * (hi - lo)
    outside = (trial < lo) | (trial > hi)
    trial[outside] = resample[outside]

    trial_e = _evaluate(cost, trial)
    accept = trial_e <= e
    members = np.where(accept[:, None], trial, x)
    energies = np.where(accept, trial_e, e)
    return Population(members, energies)


def _converged(energies, config: DeConfig) -> bool:
    if not np.all(np.isfinite(energies)):
        return False
    return np.std(energies) <= config.atol + config.tolerance * abs(np.mean(energies))


def de_minimize(cost, config: DeConfig, initial_population=None, grad=None,
                callback=None) -> OptimResult:
    """Minimize ``cost`` over the box ``config.bounds``.

    Parameters
    ----------
    cost : callable
        ``cost(x) -> float`` for a 1-D array ``x``.
    config : DeConfig
    initial_population : array_like or Population, optional
        ``(population_size, dim)`` starting members. Drawn uniformly in the
        bounds when omitted.
    grad : callable, optional
        Gradient of ``cost``, only used when ``config.polish`` is set.
    callback : callable, optional
        Called as ``callback(generation, population)`` after each generation.

    Returns
    -------
    OptimResult
    """
    rng = np.random.default_rng(config.rng_seed)
    if initial_population is None:
        members = random_population(config, rng)
    else:
        if isinstance(initial_population, Population):
            initial_population = initial_population.members
        members = np.atleast_2d(np.array(initial_population, dtype=float))
        if members.shape[1] != config.dim:
            raise ConfigError(
                f"initial population dimension {members.shape[1]} != bounds dimension {config.dim}")
        if members.shape[0] != config.population_size:
            raise ConfigError(
                f"initial population has {members.shape[0]} members, "
                f"expected {config.population_size}")
        if np.any(members < config.lower) or np.any(members > config.upper):
            raise DomainError("initial population member outside bounds")

    energies = np.array([cost(m) for m in members], dtype=float)
    if not np.all(np.isfinite(energies)):
        raise DomainError("cost is not finite at an initial population member")
    pop = Population(members, energies)
    nfev = len(pop)

    converged = False
    nit = 0
    while nit < config.max_iterations:
        pop = de_generation_step(pop, cost, config, rng)
        nfev += len(pop)
        nit += 1
        if callback is not None:
            callback(nit, pop)
        if _converged(pop.energies, config):
            converged = True
            break

    best = pop.best_index
    x, fun = pop.members[best].copy(), float(pop.energies[best])
    message = "converged" if converged else "max_iters"

    if config.polish:
        from .lbfgs import LbfgsConfig, lbfgs_minimize

        if grad is None:
            grad = _central_gradient(cost, config)
        polished = lbfgs_minimize(cost, grad, x, LbfgsConfig(bounds=config.bounds))
        nfev += polished.nfev
        if polished.fun < fun:
            x, fun = polished.x, polished.fun

    return OptimResult(x=x, fun=fun, nit=nit, nfev=nfev, converged=converged, message=message)


def _central_gradient(cost, config: DeConfig):
    lo, hi = config.lower, config.upper

    def grad(x):
        g = np.empty_like(x)
        for j in range(x.size):
            h = 1e-6 * max(1.0, abs(x[j]))
            up, down = x.copy(), x.copy()
            up[j] = min(x[j] + h, hi[j])
            down[j] = max(x[j] - h, lo[j])
            g[j] = (cost(up) - cost(down)) / (up[j] - down[j])
        return g

    return grad
