import json

import pytest

from impulse_fit import cli
from impulse_fit.dataio import load_csv

TRUTH = "265,0.1,0.12,45,15"


def run(*argv):
    return cli.main([str(a) for a in argv])


def strip_volatile(result):
    result = dict(result)
    result.pop("wall_time_s")
    result["manifest"] = {k: v for k, v in result["manifest"].items() if k != "timestamp"}
    return result


def test_fit_noiseless_from_truth(tmp_path, capsys):
    out = tmp_path / "fit.json"
    assert run("fit", "--synthetic", "default", "--algorithm", "de-seeded", "--seed", 7,
               "--init", TRUTH, "--out", out) == 0
    result = json.loads(out.read_text())
    assert result["holdout_loss"] < 1e-6
    assert result["r_squared"] > 0.999999
    assert result["manifest"]["command"] == "fit"
    assert result["manifest"]["master_seed"] == 7
    assert result["manifest"]["dataset"]["synthetic"]["days"] == 166
    assert "de_seeded" in capsys.readouterr().out


def test_fit_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run("fit", "--synthetic", "default,noise_sd=2", "--algorithm", "lbfgs",
                   "--seed", 3, "--out", path) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    ra["manifest"]["argv"] = rb["manifest"]["argv"]
    assert strip_volatile(ra) == strip_volatile(rb)


def test_missing_algorithm_is_usage_error(capsys):
    assert run("fit", "--synthetic", "default") == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["synth", "--days", "0"],
    ["fit", "--algorithm", "simplex"],
    ["fit", "--algorithm", "lbfgs", "--init", "1,2,3"],
    ["fit", "--algorithm", "lbfgs", "--synthetic", "weird"],
    ["benchmark", "--trials", "-1"],
    ["benchmark", "--algorithms", "lbfgs,bogus"],
    [],
])
def test_usage_errors(argv):
    assert cli.main(argv) == 2


def test_data_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("day,load,performance\n1,5,300\n1,5,300\n")
    assert run("fit", "--data", bad, "--algorithm", "lbfgs", "--out", tmp_path / "r.json") == 1
    assert "line 3" in capsys.readouterr().err
    assert run("fit", "--data", tmp_path / "missing.csv", "--algorithm", "lbfgs") == 1


def test_synth_then_fit_at_truth(tmp_path):
    data = tmp_path / "d.csv"
    assert run("synth", "--days", 166, "--noise-sd", 0, "--seed", 3, "--out", data) == 0
    manifest = json.loads((tmp_path / "d.csv.manifest.json").read_text())
    assert manifest["config"]["true_params"] == {"p0": 265.0, "k1": 0.1, "k2": 0.12,
                                                 "r1": 45.0, "r2": 15.0}
    out = tmp_path / "fit.json"
    assert run("fit", "--data", data, "--algorithm", "de-seeded", "--init", TRUTH,
               "--out", out) == 0
    assert json.loads(out.read_text())["fit_sse"] == 0


def test_synth_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run("synth", "--noise-sd", 2, "--seed", 11, "--days", 60, "--out", path) == 0
    assert a.read_bytes() == b.read_bytes()
    assert load_csv(a).n_days == 60


def test_benchmark_outputs(tmp_path):
    out = tmp_path / "bench"
    assert run("benchmark", "--trials", 3, "--seed", 1, "--out", out) == 0
    rows = (out / "records.csv").read_text().splitlines()
    assert len(rows) == 1 + 9
    summary = (out / "summary.txt").read_text()
    assert "df_between = 2" in summary and "df_within = 6" in summary
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["master_seed"] == 1 and manifest["config"]["trials"] == 3
    assert manifest["tool_version"]
    data = json.loads((out / "summary.json").read_text())
    assert set(data["anova"]) == {"r_squared", "holdout_loss"}

    again = tmp_path / "again"
    assert run("report", "--records", out / "records.csv", "--out", again) == 0
    assert (again / "summary.txt").read_text() == summary


def test_benchmark_algorithm_subset(tmp_path):
    out = tmp_path / "sub"
    assert run("benchmark", "--trials", 2, "--algorithms", "lbfgs", "--out", out) == 0
    rows = (out / "records.csv").read_text().splitlines()[1:]
    assert len(rows) == 2 and all(r.startswith("lbfgs,") for r in rows)


def test_workers_default_from_environment(monkeypatch):
    monkeypatch.setenv("IMPULSE_FIT_WORKERS", "3")
    args = cli.build_parser().parse_args(["benchmark"])
    assert args.workers == 3 and args.trials == 1000
