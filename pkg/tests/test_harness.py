"""Experiment configs, CSV output contract, determinism and CLI exit codes."""

import csv
import json
import subprocess
import sys

import pytest

from percolab import InvalidConfigError, SizeDistribution
from percolab.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    ResultRow,
    run_config,
    run_experiment,
    write_csv,
)

HEADER = "experiment,run_id,seed,n,process,t,delta,observable,value,prediction,pred_source,abs_err,rel_err,stderr"


def cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "percolab", *args],
        capture_output=True, text=True, timeout=600,
    )
    return proc


# ---------------------------------------------------------------------------
# config parsing and validation

def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_dict({"experiment": "constants", "n": 100, "bogus": 1})


def test_config_from_dict_requires_experiment_and_n():
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_dict({"n": 100})
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_dict({"experiment": "constants"})


@pytest.mark.parametrize("patch", [
    {"experiment": "nope"},
    {"n": 5},
    {"replicates": 0},
    {"workers": 0},
    {"experiment": "moments", "t_grid": []},
    {"experiment": "moments", "t_grid": [1.0, 0.5]},
    {"experiment": "moments", "t_grid": [-0.5, 1.0]},
    {"experiment": "moments", "process": "er"},
    {"experiment": "growth", "delta_grid": [0.5]},
    {"experiment": "growth", "delta_grid": []},
    {"experiment": "two_phase", "delta_grid": [0.0]},
    {"experiment": "two_phase", "delta_grid": [1.0]},
    {"experiment": "giant", "t_grid": [1.5], "process": "warp"},
    {"experiment": "giant", "t_grid": [1.5], "initial": "3:"},
    {"experiment": "giant", "t_grid": [1.5], "engine": "turbo"},
])
def test_config_validate_rejects(patch):
    base = {"experiment": "moments", "n": 1000, "t_grid": [0.5]}
    base.update(patch)
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_dict(base)


def test_config_roundtrips_through_dict():
    cfg = ExperimentConfig.from_dict(
        {"experiment": "giant", "n": 1000, "t_grid": [1.5], "seed": 9}
    )
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg


# ---------------------------------------------------------------------------
# row formatting

def test_row_error_columns():
    row = ResultRow("e", "0", 1, 10, "bf", 0.5, None, "s2", 2.5, 2.0, "ode")
    cells = row.csv_cells()
    assert len(cells) == len(CSV_COLUMNS) == 14
    assert cells[11] == "0.5"          # abs_err
    assert cells[12] == "0.25"         # rel_err
    assert cells[13] == ""             # no stderr on a per-run row


def test_row_rel_err_blank_for_zero_prediction():
    row = ResultRow("e", "0", 1, 10, "bf", 0.5, None, "c1", 0.1, 0.0, "ode")
    cells = row.csv_cells()
    assert cells[11] == "0.1"
    assert cells[12] == ""


def test_row_float_formatting_is_10_significant_digits():
    row = ResultRow("e", "0", 1, 10, "bf", 1 / 3, None, "s2", 2 / 3)
    cells = row.csv_cells()
    assert cells[5] == "0.3333333333"
    assert cells[8] == "0.6666666667"


# ---------------------------------------------------------------------------
# experiment outputs

@pytest.fixture(scope="module")
def tiny_variant_outcome():
    cfg = ExperimentConfig.from_dict({
        "experiment": "variant_agreement", "n": 2000, "replicates": 2,
        "seed": 3, "t_grid": [0.5],
    })
    return cfg, run_experiment(cfg)


def test_csv_header_and_shape(tiny_variant_outcome, tmp_path):
    cfg, outcome = tiny_variant_outcome
    path = tmp_path / "out.csv"
    write_csv(outcome.rows, str(path))
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == HEADER
    assert text.endswith("\n")
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(outcome.rows)
    for r in rows:
        assert r["pred_source"] in ("", "ode", "fixed_point", "closed_form")
        if r["run_id"] != "mean":
            assert r["stderr"] == ""
        if r["prediction"] and float(r["prediction"]) != 0 and r["value"]:
            want = abs(float(r["value"]) - float(r["prediction"]))
            assert float(r["abs_err"]) == pytest.approx(want, rel=1e-6)


def test_mean_rows_carry_stderr(tiny_variant_outcome):
    _, outcome = tiny_variant_outcome
    means = [r for r in outcome.rows if r.run_id == "mean"]
    assert means
    assert all(r.stderr is not None for r in means)


def test_closed_form_prediction_only_without_initial_graph(tiny_variant_outcome):
    _, outcome = tiny_variant_outcome
    preds = {r.pred_source for r in outcome.rows if r.prediction is not None}
    assert preds == {"closed_form"}  # s2 -> 1/(1-t) for the empty start


def test_rerun_is_byte_identical(tmp_path):
    cfg_dict = {
        "experiment": "giant", "n": 3000, "replicates": 2, "seed": 17,
        "t_grid": [1.4], "out": "",
    }
    texts = []
    for name in ("a.csv", "b.csv"):
        cfg_dict["out"] = str(tmp_path / name)
        cfg = ExperimentConfig.from_dict(cfg_dict)
        assert run_config(cfg, check=False, quiet=True) == 0
        texts.append((tmp_path / name).read_bytes())
    assert texts[0] == texts[1]


def test_run_config_writes_meta_sidecar(tmp_path):
    out = tmp_path / "c.csv"
    cfg = ExperimentConfig.from_dict(
        {"experiment": "constants", "n": 100, "out": str(out)}
    )
    assert run_config(cfg, check=True, quiet=True) == 0
    meta = json.loads((tmp_path / "c.csv.meta.json").read_text())
    assert meta["config"]["experiment"] == "constants"
    assert all(c["passed"] for c in meta["checks"])
    assert meta["versions"]["numpy"]


# ---------------------------------------------------------------------------
# distribution files

def test_distribution_csv_roundtrip(tmp_path):
    p = tmp_path / "dist.csv"
    p.write_text("size,count\n1,50\n2,25\n")
    dist = SizeDistribution.from_csv(str(p))
    assert dist.counts == {1: 50, 2: 25}
    assert dist.s(2) == pytest.approx(1.5)


def test_distribution_csv_requires_exact_header(tmp_path):
    p = tmp_path / "dist.csv"
    p.write_text("sz,cnt\n1,50\n")
    with pytest.raises(InvalidConfigError):
        SizeDistribution.from_csv(str(p))


def test_distribution_csv_rejects_bad_rows(tmp_path):
    p = tmp_path / "dist.csv"
    p.write_text("size,count\n0,5\n")
    with pytest.raises(InvalidConfigError):
        SizeDistribution.from_csv(str(p))


# ---------------------------------------------------------------------------
# command line contract

def test_cli_ode_runs_clean():
    proc = cli("ode", "--tol", "1e-6")
    assert proc.returncode == 0
    assert "tc=" in proc.stdout
    assert "gamma=" in proc.stdout


def test_cli_usage_errors_exit_2():
    assert cli("simulate", "--process", "warp", "--n", "10",
               "--t", "1", "--seed", "1").returncode == 2
    assert cli("bogus-subcommand").returncode == 2


def test_cli_experiment_creates_output_directory(tmp_path):
    cfg = {
        "experiment": "constants",
        "n": 100,
        "seed": 7,
        "out": "results/constants.csv",
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    proc = subprocess.run(
        [sys.executable, "-m", "percolab", "experiment", "--config", str(p)],
        capture_output=True, text=True, timeout=600, cwd=tmp_path,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "results" / "constants.csv").read_text().startswith(HEADER)


def test_cli_bad_config_exits_2(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text('{"experiment": "moments", "n": 1000, "t_grid": [0.5], "frobnicate": 1}')
    proc = cli("experiment", "--config", str(p))
    assert proc.returncode == 2
    assert cli("experiment", "--config", str(tmp_path / "missing.json")).returncode == 2


def test_cli_numerical_failure_exits_3(tmp_path):
    p = tmp_path / "dist.csv"
    p.write_text("size,count\n1,500000\n2,250000\n")
    proc = cli("fixed-point", "--dist", str(p), "--t", "0.7166666667",
               "--tol", "1e-300")
    assert proc.returncode == 3


def test_cli_check_violation_exits_4(tmp_path):
    cfg = {
        "experiment": "moments", "n": 200, "replicates": 2, "seed": 1,
        "t_grid": [1.0], "out": str(tmp_path / "m.csv"),
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    proc = cli("experiment", "--config", str(p), "--check")
    assert proc.returncode == 4
    assert "[FAIL]" in proc.stdout


def test_cli_simulate_prints_trace_csv():
    proc = cli("simulate", "--process", "bf", "--n", "5000", "--t", "1.0",
               "--seed", "5", "--record", "0.5,1.0")
    assert proc.returncode == 0
    lines = proc.stdout.strip().splitlines()
    assert lines[0] == "t,m,s2,s3,s4,c1_frac,c2_frac,x1"
    assert len(lines) == 3


def test_cli_fixed_point_reports_bounds(tmp_path):
    p = tmp_path / "dist.csv"
    p.write_text("size,count\n1,500000\n2,250000\n")
    proc = cli("fixed-point", "--dist", str(p), "--t", str(1 / 1.5 + 0.05))
    assert proc.returncode == 0
    out = dict(line.split("=", 1) for line in proc.stdout.strip().splitlines())
    assert float(out["rho"]) == pytest.approx(0.123070604, abs=1e-6)
    assert out["regime"] == "supercritical"
    assert float(out["lower"]) == pytest.approx(0.11475, abs=1e-6)
    assert float(out["upper"]) == pytest.approx(0.16416, abs=1e-6)
