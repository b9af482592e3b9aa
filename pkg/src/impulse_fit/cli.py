"""Command-line entry point.

Exit codes: 0 on success, 1 on data or runtime failure, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, report
from .dataio import (
    DEFAULT_SCENARIO,
    SplitPolicy,
    SyntheticSpec,
    load_csv,
    parse_synthetic_spec,
    save_csv,
)
from .errors import ImpulseFitError
from .experiment import ALGORITHMS, DEFAULT_SETTINGS, run_benchmark, run_trial
from .model import ModelParams
from .objective import SseObjective

log = logging.getLogger("impulse_fit")

CLI_ALGORITHMS = tuple(a.replace("_", "-") for a in ALGORITHMS)


@dataclass
class RunManifest:
    command: str
    argv: list
    config: dict
    master_seed: int | None
    dataset: dict
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def as_dict(self) -> dict:
        return asdict(self)


def _params_arg(text: str) -> ModelParams:
    try:
        values = [float(v) for v in text.split(",")]
        if len(values) != 5:
            raise ValueError(f"expected 5 comma-separated numbers, got {len(values)}")
        return ModelParams(*values)
    except (ValueError, ImpulseFitError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _fraction(text: str) -> float:
    value = _non_negative_float(text)
    if value >= 1:
        raise argparse.ArgumentTypeError(f"must be in [0, 1), got {text}")
    return value


def _synthetic_arg(text: str) -> SyntheticSpec:
    try:
        return parse_synthetic_spec(text)
    except (ValueError, TypeError, ImpulseFitError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _algorithms_arg(text: str) -> tuple:
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    bad = [n for n in names if n not in CLI_ALGORITHMS]
    if not names or bad:
        raise argparse.ArgumentTypeError(
            f"choose a comma-separated subset of {','.join(CLI_ALGORITHMS)}")
    return names


def _default_workers() -> int:
    raw = os.environ.get("IMPULSE_FIT_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_data_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", type=Path, help="dataset CSV (day,load,performance)")
    src.add_argument("--synthetic", type=_synthetic_arg, metavar="SPEC",
                     help="synthetic scenario, 'default' or 'default,key=value,...' "
                          "(default when --data is absent)")
    p.add_argument("--holdout-fraction", type=_fraction, default=0.2,
                   help="trailing fraction of observations held out (default 0.2)")


def _load_dataset(args):
    split = SplitPolicy.last_fraction(args.holdout_fraction)
    if args.data is not None:
        return load_csv(args.data, split), {"path": str(args.data)}
    spec = args.synthetic or DEFAULT_SCENARIO
    return spec.build(split), {"synthetic": _spec_dict(spec)}


def _spec_dict(spec: SyntheticSpec) -> dict:
    out = asdict(spec)
    out["true_params"] = spec.true_params.as_dict()
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, allow_nan=True) + "\n", encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="impulse-fit",
                                     description="Impulse-response model fitting and benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit one dataset with one algorithm")
    _add_data_options(fit)
    fit.add_argument("--algorithm", required=True, choices=CLI_ALGORITHMS)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--init", type=_params_arg, metavar="P0,K1,K2,R1,R2",
                     help="starting parameters instead of a random sample")
    fit.add_argument("--out", type=Path, default=Path("fit_result.json"))

    bench = sub.add_parser("benchmark", help="repeat paired fits from random starts")
    _add_data_options(bench)
    bench.add_argument("--trials", type=_positive_int, default=1000)
    bench.add_argument("--algorithms", type=_algorithms_arg, default=CLI_ALGORITHMS,
                       metavar="LIST", help=f"comma-separated, default {','.join(CLI_ALGORITHMS)}")
    bench.add_argument("--seed", type=int, default=0, help="master seed")
    bench.add_argument("--workers", type=_positive_int, default=_default_workers(),
                       help="worker processes (default $IMPULSE_FIT_WORKERS or 1)")
    bench.add_argument("--out", type=Path, default=Path("benchmark_out"))

    synth = sub.add_parser("synth", help="write a synthetic dataset CSV")
    synth.add_argument("--days", type=_positive_int, default=DEFAULT_SCENARIO.days)
    synth.add_argument("--true-params", type=_params_arg, default=DEFAULT_SCENARIO.true_params,
                       metavar="P0,K1,K2,R1,R2")
    synth.add_argument("--noise-sd", type=_non_negative_float, default=DEFAULT_SCENARIO.noise_sd)
    synth.add_argument("--obs-every", type=_positive_int, default=DEFAULT_SCENARIO.obs_every)
    synth.add_argument("--load-max", type=_non_negative_float, default=DEFAULT_SCENARIO.load_max)
    synth.add_argument("--seed", type=int, default=DEFAULT_SCENARIO.seed)
    synth.add_argument("--out", type=Path, default=Path("synthetic.csv"))

    rep = sub.add_parser("report", help="re-render summaries from a records CSV")
    rep.add_argument("--records", type=Path, required=True)
    rep.add_argument("--out", type=Path, default=None,
                     help="output directory (default: next to the records file)")
    return parser


def cmd_fit(args, argv) -> int:
    dataset, source = _load_dataset(args)
    rec = run_trial(dataset, args.algorithm, args.seed, DEFAULT_SETTINGS, initial=args.init)
    theta = rec.final_params.as_array()
    fit_sse = SseObjective(dataset.loads, dataset.fit_obs)(theta)
    manifest = RunManifest(
        command="fit",
        argv=argv,
        config={"algorithm": args.algorithm, "seed": args.seed,
                "init": args.init.as_dict() if args.init else None,
                "holdout_fraction": args.holdout_fraction,
                "settings": DEFAULT_SETTINGS.as_dict()},
        master_seed=args.seed,
        dataset=source,
    )
    result = {
        "algorithm": rec.algorithm,
        "seed": rec.seed,
        "initial_params": rec.initial_params.as_dict(),
        "final_params": rec.final_params.as_dict(),
        "fit_sse": fit_sse,
        "r_squared": rec.fit_r_squared,
        "holdout_loss": rec.holdout_loss,
        "function_evaluations": rec.function_evaluations,
        "wall_time_s": rec.wall_time,
        "converged": rec.converged,
        "manifest": manifest.as_dict(),
    }
    _write_json(args.out, result)
    p = rec.final_params
    print(f"{rec.algorithm}: p0={p.p0:.6g} k1={p.k1:.6g} k2={p.k2:.6g} r1={p.r1:.6g} "
          f"r2={p.r2:.6g} sse={fit_sse:.6g} R2={rec.fit_r_squared:.6f} "
          f"holdout={rec.holdout_loss:.6g} fevals={rec.function_evaluations} -> {args.out}")
    return 0


def cmd_benchmark(args, argv) -> int:
    dataset, source = _load_dataset(args)
    total = args.trials * len(args.algorithms)

    def progress(done):
        if done % 100 == 0 or done == total:
            log.info("%d/%d trials finished", done, total)

    bench = run_benchmark(dataset, args.trials, args.algorithms, args.seed, DEFAULT_SETTINGS,
                          workers=args.workers, progress=progress)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    report.write_records(bench.records, out / "records.csv")
    summary = bench.summary()
    (out / "summary.txt").write_text(report.render_summary(summary), encoding="utf-8")
    _write_json(out / "summary.json", report.summary_to_json(summary))
    manifest = RunManifest(
        command="benchmark",
        argv=argv,
        config={"trials": args.trials, "algorithms": list(bench.algorithms),
                "workers": args.workers, "holdout_fraction": args.holdout_fraction,
                "settings": DEFAULT_SETTINGS.as_dict()},
        master_seed=args.seed,
        dataset=source,
    )
    _write_json(out / "manifest.json", manifest.as_dict())
    parts = [f"{alg}: mean R2={s.mean:.6f}" for alg, s in summary["r_squared"].items()]
    print(f"{len(bench.records)} records ({len(bench.failed)} failed); " + "; ".join(parts)
          + f" -> {out}")
    return 0


def cmd_synth(args, argv) -> int:
    spec = replace(DEFAULT_SCENARIO, days=args.days, true_params=args.true_params,
                   noise_sd=args.noise_sd, obs_every=args.obs_every, load_max=args.load_max,
                   seed=args.seed)
    dataset = spec.build(SplitPolicy.last_fraction(0.0))
    save_csv(dataset, args.out)
    manifest = RunManifest(command="synth", argv=argv, config=_spec_dict(spec),
                           master_seed=args.seed, dataset={"synthetic": _spec_dict(spec),
                                                           "path": str(args.out)})
    _write_json(args.out.with_name(args.out.name + ".manifest.json"), manifest.as_dict())
    print(f"wrote {dataset.n_days} days, {len(dataset.all_observations())} observations "
          f"-> {args.out}")
    return 0


def cmd_report(args, argv) -> int:
    records = report.read_records(args.records)
    if not records:
        raise ImpulseFitError(f"{args.records} holds no records")
    out = args.out or args.records.parent
    out.mkdir(parents=True, exist_ok=True)
    summary = report.report_from_records(records).summary()
    (out / "summary.txt").write_text(report.render_summary(summary), encoding="utf-8")
    _write_json(out / "summary.json", report.summary_to_json(summary))
    print(f"rendered {len(records)} records -> {out}")
    return 0


COMMANDS = {"fit": cmd_fit, "benchmark": cmd_benchmark, "synth": cmd_synth, "report": cmd_report}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except (ImpulseFitError, OSError, ValueError) as exc:
        print(f"impulse-fit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
