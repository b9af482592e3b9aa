"""Benchmark protocol: random starts, seeded DE populations and paired trials.

Every trial index ``i`` gets one seed derived from the master seed. The
initial parameter sample is drawn from that seed alone, so the L-BFGS start
and member 0 of the seeded DE population are the same vector. Optimizer
randomness is drawn from a stream keyed additionally by the algorithm name.
Results therefore do not depend on worker count or scheduling order.
"""
from __future__ import annotations

import concurrent.futures
import logging
import time
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import stats
from .dataio import Dataset
from .errors import ConfigError, DomainError, TrialError
from .model import PARAM_NAMES, ModelParams
from .objective import SseObjective
from .optimize.de import DeConfig, Population, de_minimize
from .optimize.lbfgs import LbfgsConfig, lbfgs_minimize

log = logging.getLogger(__name__)

ALGORITHMS = ("lbfgs", "de_random", "de_seeded")

# optimizer box for (p0, k1, k2, r1, r2)
DEFAULT_BOUNDS = ((0.0, 1000.0), (0.01, 1000.0), (0.01, 1000.0), (1.0, 120.0), (1.0, 120.0))


def normalize_algorithm(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    if key not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    return key


@dataclass(frozen=True)
class InitSamplingBox:
    """Intervals for drawing random starting parameters."""

    p0: tuple = (240.0, 340.0)
    k1: tuple = (0.01, 10.0)
    k2: tuple = (0.01, 10.0)
    r1: tuple = (1.0, 100.0)
    r2: tuple = (1.0, 100.0)

    def __post_init__(self):
        for name in PARAM_NAMES:
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ConfigError(f"sampling interval for {name} needs lower < upper")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=float)


def sample_initial(box: InitSamplingBox, rng_seed) -> ModelParams:
    """Draw each parameter uniformly from its interval."""
    b = box.as_array()
    rng = np.random.default_rng(rng_seed)
    return ModelParams.from_array(b[:, 0] + rng.random(5) * (b[:, 1] - b[:, 0]))


def build_seeded_population(initial: ModelParams, size: int = 20, relative_sd: float = 0.05,
                            bounds=DEFAULT_BOUNDS, rng_seed=0) -> Population:
    """DE starting population centred on ``initial``.

    Member 0 is ``initial`` itself. The others draw each coordinate from
    ``Normal(initial_j, relative_sd * |initial_j|)`` and are clamped into the
    bounds.
    """
    if size < 1:
        raise DomainError("population size must be >= 1")
    if relative_sd < 0:
        raise DomainError("relative_sd must be >= 0")
    theta = initial.as_array() if isinstance(initial, ModelParams) else np.asarray(initial, float)
    b = np.asarray(bounds, dtype=float)
    if np.any(theta < b[:, 0]) or np.any(theta > b[:, 1]):
        raise DomainError(f"initial parameters {theta} outside optimizer bounds")
    rng = np.random.default_rng(rng_seed)
    members = np.empty((size, theta.size))
    members[0] = theta
    if size > 1:
        draws = rng.normal(theta, relative_sd * np.abs(theta), size=(size - 1, theta.size))
        members[1:] = np.clip(draws, b[:, 0], b[:, 1])
    return Population(members)


@dataclass(frozen=True)
class Settings:
    """All knobs of one benchmark protocol."""

    lbfgs: LbfgsConfig = LbfgsConfig(bounds=DEFAULT_BOUNDS)
    de: DeConfig = DeConfig(bounds=DEFAULT_BOUNDS)
    box: InitSamplingBox = InitSamplingBox()
    seeded_relative_sd: float = 0.05

    def as_dict(self) -> dict:
        def plain(cfg):
            out = {}
            for key, value in cfg.__dict__.items():
                out[key] = [list(b) for b in value] if key == "bounds" and value else value
            return out

        return {
            "lbfgs": plain(self.lbfgs),
            "de": {k: (list(v) if isinstance(v, tuple) and k != "bounds" else v)
                   for k, v in plain(self.de).items()},
            "init_box": {name: list(getattr(self.box, name)) for name in PARAM_NAMES},
            "seeded_relative_sd": self.seeded_relative_sd,
        }


DEFAULT_SETTINGS = Settings()


@dataclass
class TrialRecord:
    algorithm: str
    trial: int
    seed: int
    initial_params: ModelParams
    final_params: ModelParams | None
    fit_r_squared: float
    holdout_loss: float
    function_evaluations: int
    wall_time: float
    converged: bool
    error: str | None = field(default=None, compare=False)

    @property
    def failed(self) -> bool:
        return self.final_params is None


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed shared by all algorithms for trial ``trial``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial,))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def algorithm_seed(seed: int, algorithm: str) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(algorithm.encode()),))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _fit_metrics(objective: SseObjective, dataset: Dataset, theta) -> tuple[float, float]:
    pred = objective.predictions(theta)
    r2 = stats.r_squared(pred, dataset.fit_obs.values)
    if len(dataset.holdout_obs):
        hold = SseObjective(dataset.loads, dataset.holdout_obs)(theta)
    else:
        hold = float("nan")
    return r2, hold


def run_trial(dataset: Dataset, algorithm: str, seed: int, settings: Settings = DEFAULT_SETTINGS,
              trial: int = 0, initial: ModelParams | None = None) -> TrialRecord:
    """Fit ``dataset`` once with ``algorithm`` and record the outcome.

    ``initial`` overrides the random starting sample.
    """
    algorithm = normalize_algorithm(algorithm)
    if initial is None:
        initial = sample_initial(settings.box, seed)
    objective = SseObjective(dataset.loads, dataset.fit_obs)
    x0 = initial.as_array()

    try:
        if algorithm == "lbfgs":
            start = time.perf_counter()
            res = lbfgs_minimize(objective, objective.gradient, x0, settings.lbfgs)
            elapsed = time.perf_counter() - start
        else:
            de_cfg = replace(settings.de, rng_seed=algorithm_seed(seed, algorithm))
            population = None
            if algorithm == "de_seeded":
                population = build_seeded_population(
                    initial, de_cfg.population_size, settings.seeded_relative_sd,
                    de_cfg.bounds, rng_seed=algorithm_seed(seed, "seeded_population"))
            start = time.perf_counter()
            res = de_minimize(objective, de_cfg, population, grad=objective.gradient)
            elapsed = time.perf_counter() - start
    except Exception as exc:
        raise TrialError(f"trial {trial} ({algorithm}, seed {seed}): {exc}") from exc

    r2, hold = _fit_metrics(objective, dataset, res.x)
    return TrialRecord(
        algorithm=algorithm,
        trial=trial,
        seed=seed,
        initial_params=initial,
        final_params=ModelParams.from_array(res.x),
        fit_r_squared=r2,
        holdout_loss=hold,
        function_evaluations=res.nfev,
        wall_time=max(elapsed, 1e-9),
        converged=res.converged,
    )


def _run_task(args) -> TrialRecord:
    dataset, algorithm, trial, seed, settings = args
    try:
        return run_trial(dataset, algorithm, seed, settings, trial=trial)
    except Exception as exc:  # recorded, benchmark continues
        nan = float("nan")
        return TrialRecord(algorithm, trial, seed, sample_initial(settings.box, seed), None,
                           nan, nan, 0, nan, False, error=str(exc))


@dataclass
class BenchmarkReport:
    records: list
    algorithms: tuple
    n_trials: int
    master_seed: int

    @property
    def failed(self) -> list:
        return [r for r in self.records if r.failed]

    def by_algorithm(self, algorithm: str, include_failed: bool = False) -> list:
        return [r for r in self.records
                if r.algorithm == algorithm and (include_failed or not r.failed)]

    def summary(self) -> dict:
        """Aggregate statistics per algorithm plus ANOVA across algorithms."""
        out = {"parameters": {}, "r_squared": {}, "holdout_loss": {}, "wall_time_s": {},
               "anova": {}, "n_trials": self.n_trials, "failed_trials": len(self.failed)}
        groups_r2, groups_hold = [], []
        for alg in self.algorithms:
            recs = self.by_algorithm(alg)
            if len(recs) < 2:
                continue
            finals = np.array([r.final_params.as_array() for r in recs])
            out["parameters"][alg] = {
                name: stats.summarize(finals[:, j]) for j, name in enumerate(PARAM_NAMES)}
            r2 = np.array([r.fit_r_squared for r in recs])
            hold = np.array([r.holdout_loss for r in recs])
            wall = np.array([r.wall_time for r in recs])
            out["r_squared"][alg] = stats.summarize(r2)
            if np.all(np.isfinite(hold)):
                out["holdout_loss"][alg] = stats.summarize(hold)
                groups_hold.append(hold)
            out["wall_time_s"][alg] = wall_time_profile(wall)
            groups_r2.append(r2)
        if len(groups_r2) >= 2:
            out["anova"]["r_squared"] = stats.one_way_anova(groups_r2)
        if len(groups_hold) >= 2:
            out["anova"]["holdout_loss"] = stats.one_way_anova(groups_hold)
        return out


def wall_time_profile(wall) -> dict:
    """Distribution summary of process times."""
    wall = np.asarray(wall, dtype=float)
    q = np.percentile(wall, [0, 25, 50, 75, 100])
    return {"mean": float(wall.mean()), "min": float(q[0]), "q25": float(q[1]),
            "median": float(q[2]), "q75": float(q[3]), "max": float(q[4]),
            "total": float(wall.sum())}


def run_benchmark(dataset: Dataset, n_trials: int, algorithms=ALGORITHMS, master_seed: int = 0,
                  settings: Settings = DEFAULT_SETTINGS, workers: int = 1,
                  progress=None) -> BenchmarkReport:
    """Run ``n_trials`` paired trials for each algorithm.

    Records come back ordered by trial, then by the order of ``algorithms``.
    ``progress`` is called with the number of finished records.
    """
    if n_trials < 1:
        raise ConfigError("n_trials must be >= 1")
    algorithms = tuple(normalize_algorithm(a) for a in algorithms)
    if not algorithms:
        raise ConfigError("no algorithms selected")
    tasks = [(dataset, alg, i, trial_seed(master_seed, i), settings)
             for i in range(n_trials) for alg in algorithms]
    records = []
    if workers <= 1:
        for task in tasks:
            records.append(_run_task(task))
            if progress:
                progress(len(records))
    else:
        chunk = max(1, len(tasks) // (workers * 8))
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for rec in pool.map(_run_task, tasks, chunksize=chunk):
                records.append(rec)
                if progress:
                    progress(len(records))
    for rec in records:
        if rec.failed:
            log.warning("trial %d (%s) failed: %s", rec.trial, rec.algorithm, rec.error)
    return BenchmarkReport(records, algorithms, n_trials, master_seed)
