"""Dataset ingestion, fit/hold-out splitting and synthetic data.

CSV layout (UTF-8, LF or CRLF)::

    day,load,performance
    1,100,300.0
    2,0,
    3,50,295.5

``day`` is a strictly increasing positive integer. Days missing from the
file get zero load and no observation. A blank ``performance`` means the day
was not tested.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError
from .model import ModelParams, as_loads, predict_series
from .objective import ObservationSet

HEADER = ["day", "load", "performance"]


@dataclass(frozen=True)
class SplitPolicy:
    """How observations are divided into fit and hold-out sets.

    kind : {"last_fraction", "every_kth", "days"}
        ``last_fraction`` holds out the chronologically last ``fraction`` of
        observations (rounded half up, at least one observation kept for
        fitting). ``every_kth`` holds out observations ``k, 2k, ...`` in day
        order. ``days`` holds out exactly the listed days.
    """

    kind: str = "last_fraction"
    fraction: float = 0.2
    k: int = 5
    days: tuple = ()

    def __post_init__(self):
        if self.kind not in ("last_fraction", "every_kth", "days"):
            raise DomainError(f"unknown split kind {self.kind!r}")
        if not 0 <= self.fraction < 1:
            raise DomainError("hold-out fraction must lie in [0, 1)")
        if self.k < 2:
            raise DomainError("every_kth needs k >= 2")

    @classmethod
    def last_fraction(cls, fraction: float) -> "SplitPolicy":
        return cls("last_fraction", fraction=fraction)

    @classmethod
    def every_kth(cls, k: int) -> "SplitPolicy":
        return cls("every_kth", k=k)

    @classmethod
    def explicit(cls, days) -> "SplitPolicy":
        return cls("days", days=tuple(sorted(int(d) for d in days)))

    def holdout_mask(self, days: np.ndarray) -> np.ndarray:
        n = days.size
        mask = np.zeros(n, dtype=bool)
        if self.kind == "last_fraction":
            n_hold = min(int(math.floor(self.fraction * n + 0.5)), max(n - 1, 0))
            if n_hold:
                mask[n - n_hold:] = True
        elif self.kind == "every_kth":
            mask[self.k - 1::self.k] = True
        else:
            mask = np.isin(days, np.asarray(self.days, dtype=np.int64))
        return mask

    def split(self, obs: ObservationSet) -> tuple[ObservationSet, ObservationSet]:
        mask = self.holdout_mask(obs.days)
        fit = ObservationSet(obs.days[~mask], obs.values[~mask])
        hold = ObservationSet(obs.days[mask], obs.values[mask])
        return fit, hold


DEFAULT_SPLIT = SplitPolicy()


@dataclass(frozen=True)
class Dataset:
    loads: np.ndarray
    fit_obs: ObservationSet
    holdout_obs: ObservationSet
    metadata: str = field(default="", compare=False)

    def __post_init__(self):
        w = as_loads(self.loads)
        w.setflags(write=False)
        object.__setattr__(self, "loads", w)
        if len(self.fit_obs) + len(self.holdout_obs) == 0:
            raise DomainError("dataset has no observations")
        if np.intersect1d(self.fit_obs.days, self.holdout_obs.days).size:
            raise DomainError("fit and hold-out observations share days")
        for obs in (self.fit_obs, self.holdout_obs):
            if len(obs) and obs.days[-1] > w.size:
                raise DomainError(f"observation day {obs.days[-1]} beyond {w.size} load days")

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.loads, other.loads)
            and self.fit_obs == other.fit_obs
            and self.holdout_obs == other.holdout_obs
        )

    @property
    def n_days(self) -> int:
        return int(self.loads.size)

    def all_observations(self) -> ObservationSet:
        days = np.concatenate([self.fit_obs.days, self.holdout_obs.days])
        values = np.concatenate([self.fit_obs.values, self.holdout_obs.values])
        return ObservationSet(days, values)


def _parse_float(text, what, line):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not a number", line) from None
    if not math.isfinite(value):
        raise ParseError(f"{what} {text!r} is not finite", line)
    return value


def parse_csv(text: str, split: SplitPolicy = DEFAULT_SPLIT, metadata: str = "") -> Dataset:
    """Parse CSV text in the dataset layout."""
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or [c.strip() for c in rows[0]] != HEADER:
        raise ParseError("header must be 'day,load,performance'", 1)
    loads = {}
    observed = []
    last_day = 0
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line)
        day_text, load_text, perf_text = (c.strip() for c in row)
        try:
            day = int(day_text)
        except ValueError:
            raise ParseError(f"day {day_text!r} is not an integer", line) from None
        if day < 1:
            raise ParseError(f"day {day} is not positive", line)
        if day == last_day:
            raise ParseError(f"duplicate day {day}", line)
        if day < last_day:
            raise ParseError(f"day {day} is not after day {last_day}", line)
        last_day = day
        load = _parse_float(load_text, "load", line)
        if load < 0:
            raise ParseError(f"load {load} is negative", line)
        loads[day] = load
        if perf_text:
            observed.append((day, _parse_float(perf_text, "performance", line)))
    if not loads:
        raise ParseError("no data rows", len(rows))
    if not observed:
        raise DomainError("dataset has no performance observations")
    w = np.zeros(last_day)
    for day, load in loads.items():
        w[day - 1] = load
    fit, hold = split.split(ObservationSet.from_pairs(observed))
    return Dataset(w, fit, hold, metadata)


def load_csv(path, split: SplitPolicy = DEFAULT_SPLIT) -> Dataset:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_csv(text, split, metadata=f"csv:{path}")


def format_csv(dataset: Dataset) -> str:
    """Serialize a dataset; floats use ``repr`` so values round-trip exactly."""
    obs = dict(dataset.all_observations().pairs())
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for day, load in enumerate(dataset.loads, start=1):
        perf = repr(obs[day]) if day in obs else ""
        writer.writerow([day, repr(float(load)), perf])
    return out.getvalue()


def save_csv(dataset: Dataset, path) -> None:
    Path(path).write_text(format_csv(dataset), encoding="utf-8")


def generate_synthetic(true_params, loads, observation_days, noise_sd: float = 0.0,
                       rng_seed: int = 0, split: SplitPolicy = DEFAULT_SPLIT,
                       metadata: str = "synthetic") -> Dataset:
    """Observations ``y_t = p_t(true_params) + N(0, noise_sd^2)`` on the given days."""
    w = as_loads(loads)
    days = np.unique(np.asarray(list(observation_days), dtype=np.int64))
    if days.size == 0:
        raise DomainError("observation_days is empty")
    if days[0] < 1 or days[-1] > w.size:
        raise DomainError(f"observation days must lie in 1..{w.size}")
    if noise_sd < 0:
        raise DomainError("noise_sd must be >= 0")
    y = predict_series(true_params, w)[days - 1]
    if noise_sd > 0:
        y = y + np.random.default_rng(rng_seed).normal(0.0, noise_sd, size=days.size)
    fit, hold = split.split(ObservationSet(days, y))
    return Dataset(w, fit, hold, metadata)


@dataclass(frozen=True)
class SyntheticSpec:
    """A reproducible synthetic scenario.

    The default mirrors the 166-session layout: uniform daily loads in
    ``[0, load_max]`` and a test every ``obs_every`` days.
    """

    days: int = 166
    load_max: float = 150.0
    obs_every: int = 7
    true_params: ModelParams = ModelParams(p0=265.0, k1=0.10, k2=0.12, r1=45.0, r2=15.0)
    noise_sd: float = 0.0
    seed: int = 2020

    def __post_init__(self):
        if self.days < 1:
            raise DomainError("days must be >= 1")
        if self.obs_every < 1 or self.obs_every > self.days:
            raise DomainError("obs_every must lie in 1..days")
        if self.load_max < 0 or self.noise_sd < 0:
            raise DomainError("load_max and noise_sd must be >= 0")

    def loads(self) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(0,)))
        return rng.uniform(0.0, self.load_max, size=self.days)

    def observation_days(self) -> np.ndarray:
        return np.arange(self.obs_every, self.days + 1, self.obs_every)

    def build(self, split: SplitPolicy = DEFAULT_SPLIT) -> Dataset:
        noise_seed = np.random.SeedSequence(self.seed, spawn_key=(1,))
        return generate_synthetic(
            self.true_params,
            self.loads(),
            self.observation_days(),
            noise_sd=self.noise_sd,
            rng_seed=noise_seed,
            split=split,
            metadata=self.describe(),
        )

    def describe(self) -> str:
        p = self.true_params
        return (
            f"synthetic:days={self.days},load_max={self.load_max},obs_every={self.obs_every},"
            f"noise_sd={self.noise_sd},seed={self.seed},"
            f"true_params={p.p0},{p.k1},{p.k2},{p.r1},{p.r2}"
        )


DEFAULT_SCENARIO = SyntheticSpec()


def parse_synthetic_spec(text: str) -> SyntheticSpec:
    """Parse ``default`` or ``default,key=value,...`` (keys are SyntheticSpec fields).

    ``true_params`` takes five colon-separated numbers, e.g.
    ``true_params=265:0.1:0.12:45:15``.
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts or parts[0] != "default":
        raise DomainError(f"synthetic spec must start with 'default', got {text!r}")
    kwargs = {}
    casts = {"days": int, "obs_every": int, "seed": int, "load_max": float, "noise_sd": float}
    for part in parts[1:]:
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep:
            raise DomainError(f"expected key=value in synthetic spec, got {part!r}")
        if key == "true_params":
            kwargs[key] = ModelParams(*(float(v) for v in value.split(":")))
        elif key in casts:
            kwargs[key] = casts[key](value)
        else:
            raise DomainError(f"unknown synthetic spec key {key!r}")
    return SyntheticSpec(**kwargs)
