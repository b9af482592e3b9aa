"""Benchmark record files and summary rendering."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .experiment import ALGORITHMS, BenchmarkReport, TrialRecord
from .model import PARAM_NAMES, ModelParams
from .stats import AnovaResult, GroupSummary

RECORD_COLUMNS = [
    "algorithm", "trial", "seed",
    *(f"init_{name}" for name in PARAM_NAMES),
    *PARAM_NAMES,
    "r_squared", "holdout_loss", "fevals", "wall_time_s", "converged",
]


def _num(value: float) -> str:
    return repr(float(value))


def format_records(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for r in records:
        final = r.final_params.as_array() if r.final_params else [math.nan] * 5
        writer.writerow([
            r.algorithm, r.trial, r.seed,
            *(_num(v) for v in r.initial_params.as_array()),
            *(_num(v) for v in final),
            _num(r.fit_r_squared), _num(r.holdout_loss), r.function_evaluations,
            _num(r.wall_time), "true" if r.converged else "false",
        ])
    return out.getvalue()


def write_records(records, path) -> None:
    Path(path).write_text(format_records(records), encoding="utf-8")


def parse_records(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != RECORD_COLUMNS:
        raise ValueError("records file header does not match the expected columns")
    records = []
    for row in reader:
        init = ModelParams(*(float(row[f"init_{n}"]) for n in PARAM_NAMES))
        final = [float(row[n]) for n in PARAM_NAMES]
        records.append(TrialRecord(
            algorithm=row["algorithm"],
            trial=int(row["trial"]),
            seed=int(row["seed"]),
            initial_params=init,
            final_params=None if any(math.isnan(v) for v in final) else ModelParams(*final),
            fit_r_squared=float(row["r_squared"]),
            holdout_loss=float(row["holdout_loss"]),
            function_evaluations=int(row["fevals"]),
            wall_time=float(row["wall_time_s"]),
            converged=row["converged"] == "true",
        ))
    return records


def read_records(path) -> list:
    return parse_records(Path(path).read_text(encoding="utf-8"))


def report_from_records(records, master_seed=None) -> BenchmarkReport:
    present = {r.algorithm for r in records}
    algorithms = tuple(a for a in ALGORITHMS if a in present)
    n_trials = max((r.trial for r in records), default=-1) + 1
    return BenchmarkReport(list(records), algorithms, n_trials, master_seed)


def summary_to_json(summary: dict) -> dict:
    """Plain-JSON mirror of :meth:`BenchmarkReport.summary`."""

    def plain(value):
        if isinstance(value, (GroupSummary, AnovaResult)):
            return plain(value.as_dict())
        if isinstance(value, dict):
            return {k: plain(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [plain(v) for v in value]
        if isinstance(value, float) and not math.isfinite(value):
            return str(value)
        return value

    return plain(summary)


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return str(x)
    if x != 0 and (abs(x) >= 1e5 or abs(x) < 1e-3):
        return f"{x:.4e}"
    return f"{x:.4f}"


def render_summary(summary: dict) -> str:
    """Fixed-width text summary: parameter table, metric summaries, ANOVA, timings."""
    lines = []
    width = 12
    lines.append("Final parameter estimates per algorithm")
    lines.append("CI rows are the empirical 2.5/97.5 percentiles of the final values;")
    lines.append("'Mean CI' rows are the normal-approximation 95% interval of the mean.")
    lines.append("")
    header = f"{'algorithm':<11}{'statistic':<14}" + "".join(f"{n:>{width}}" for n in PARAM_NAMES)
    lines.append(header)
    lines.append("-" * len(header))
    for alg, params in summary["parameters"].items():
        rows = [
            ("Mean", lambda s: s.mean),
            ("CI Lower", lambda s: s.percentile_interval[0]),
            ("CI Upper", lambda s: s.percentile_interval[1]),
            ("Std Dev", lambda s: s.std_dev),
            ("Mean CI Low", lambda s: s.ci_mean[0]),
            ("Mean CI High", lambda s: s.ci_mean[1]),
        ]
        for i, (label, get) in enumerate(rows):
            name = alg if i == 0 else ""
            lines.append(f"{name:<11}{label:<14}" + "".join(
                f"{_fmt(get(params[n])):>{width}}" for n in PARAM_NAMES))
        lines.append("")

    for key, title in (("r_squared", "Fitted R-squared"), ("holdout_loss", "Hold-out loss (SSE)")):
        if not summary[key]:
            continue
        lines.append(title)
        lines.append(f"{'algorithm':<11}{'n':>6}{'mean':>14}{'std':>14}"
                     f"{'mean CI low':>14}{'mean CI high':>14}{'p2.5':>14}{'p97.5':>14}")
        for alg, s in summary[key].items():
            lines.append(
                f"{alg:<11}{s.n:>6}{_fmt(s.mean):>14}{_fmt(s.std_dev):>14}"
                f"{_fmt(s.ci_mean[0]):>14}{_fmt(s.ci_mean[1]):>14}"
                f"{_fmt(s.percentile_interval[0]):>14}{_fmt(s.percentile_interval[1]):>14}")
        lines.append("")

    for key, anova in summary["anova"].items():
        lines.append(f"ANOVA {key}: F = {_fmt(anova.f_statistic)}, df_between = {anova.df_between}, "
                     f"df_within = {anova.df_within}, p = {anova.p_value:.3e}")
    if summary["anova"]:
        lines.append("")

    lines.append("Process time (s)")
    lines.append(f"{'algorithm':<11}" + "".join(
        f"{k:>12}" for k in ("mean", "min", "q25", "median", "q75", "max", "total")))
    for alg, prof in summary["wall_time_s"].items():
        lines.append(f"{alg:<11}" + "".join(
            f"{_fmt(prof[k]):>12}" for k in ("mean", "min", "q25", "median", "q75", "max", "total")))
    lines.append("")
    lines.append(f"trials: {summary['n_trials']}, failed records: {summary['failed_trials']}")
    return "\n".join(lines) + "\n"
