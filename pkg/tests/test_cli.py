"""Batch front end: config parsing, exit codes, artifacts, drift compare."""

import csv
import os
import re
import subprocess
import sys

import numpy as np
import pytest

from _helpers import CONFIG_DIR
from nlevo import cli
from nlevo.errors import ConfigurationError

HEAT = os.path.join(CONFIG_DIR, "heat_interval.toml")
BLOWUP = os.path.join(CONFIG_DIR, "burgers_blowup.toml")
BAD_TRAITS = os.path.join(CONFIG_DIR, "heat_bad_traits.toml")


def run_cli(*args):
    return cli.main(list(args))


def read_text(path):
    with open(path) as fh:
        return fh.read()


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- config parsing ---------------------------------------------------------

def test_parse_minimal_config():
    cfg = cli.parse_config(read_text(HEAT))
    assert list(cfg.tasks) == ["solve", "energy"]
    assert cfg.seed == 42
    assert cfg.problem.name == "burgers"
    assert cfg.problem.basis.n_modes == 16


def test_seed_and_out_overrides_beat_config(tmp_path):
    cfg = cli.parse_config(read_text(HEAT), seed_override=7,
                           out_override=str(tmp_path / "x"))
    assert cfg.seed == 7
    assert cfg.output_dir == str(tmp_path / "x")


def test_env_var_supplies_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV_VAR, str(tmp_path / "via_env"))
    cfg = cli.parse_config(read_text(HEAT))
    assert cfg.output_dir == str(tmp_path / "via_env")
    # an explicit --out still wins over the environment
    cfg = cli.parse_config(read_text(HEAT), out_override=str(tmp_path / "cli"))
    assert cfg.output_dir == str(tmp_path / "cli")


@pytest.mark.parametrize("snippet,message", [
    ('equation = "nse_3d"\ntasks = ["solve"]\n', "unknown equation"),
    ('equation = "burgers"\ntasks = ["energy"]\n', "energy"),
    ('equation = "burgers"\ntasks = ["solve"]\n[solver]\nfrobz = 1\n',
     "unknown key"),
    ('equation = "burgers"\ntasks = ["solve"]\n[initial]\nmode = 1\n'
     'coeffs = [1.0]\n', "initial"),
    ('equation = "p_laplace"\ntasks = ["solve"]\n[params]\np = 2.0\n',
     "p > 2"),
])
def test_parse_rejections(snippet, message):
    with pytest.raises(ConfigurationError, match=message):
        cli.parse_config(snippet)


def test_bad_config_exits_one(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('equation = "nse_3d"\ntasks = ["solve"]\n')
    assert run_cli("run", str(bad)) == cli.EXIT_CONFIG
    assert run_cli("run", str(tmp_path / "missing.toml")) == cli.EXIT_CONFIG


# --- the three fixture runs -------------------------------------------------

def test_clean_run_exits_zero(tmp_path):
    out = str(tmp_path / "heat")
    assert run_cli("run", HEAT, "--out", out) == cli.EXIT_OK
    names = set(os.listdir(out))
    assert {"tasks.csv", "trajectory.csv", "ledger.csv", "timings.csv",
            "report.txt"} <= names
    rows = read_csv(os.path.join(out, "trajectory.csv"))
    assert rows[0] == ["t", "norm_H", "norm_V", "x_norm",
                       "ledger_lhs", "ledger_rhs", "slack"]
    final_h = float(rows[-1][1])
    assert final_h == pytest.approx(np.exp(-1.0), abs=1e-6)


def test_blowup_run_exits_two_with_partial_outputs(tmp_path):
    out = str(tmp_path / "blow")
    assert run_cli("run", BLOWUP, "--out", out) == cli.EXIT_NUMERICAL
    rows = read_csv(os.path.join(out, "trajectory.csv"))
    assert float(rows[-1][0]) == pytest.approx(0.2, abs=1e-12)
    report = read_text(os.path.join(out, "report.txt"))
    assert "blowup" in report


def test_trait_violation_exits_three(tmp_path):
    out = str(tmp_path / "bad")
    assert run_cli("run", BAD_TRAITS, "--out", out) == cli.EXIT_VIOLATION
    rows = read_csv(os.path.join(out, "checks.csv"))
    header, body = rows[0], rows[1:]
    assert header[0] == "condition"
    h3 = [r for r in body if r[0] == "H3"]
    assert h3 and h3[0][1] == "violated"
    assert int(h3[0][3]) > 0  # violation count recorded
    assert "|v|_V" in h3[0][7]  # extremal sample names the witness field


# --- output format contracts ------------------------------------------------

def test_csv_cells_are_seventeen_digit_round_trips(tmp_path):
    out = str(tmp_path / "heat")
    run_cli("run", HEAT, "--out", out)
    rows = read_csv(os.path.join(out, "trajectory.csv"))
    for row in rows[1:]:
        for cell in row:
            if cell == "":
                continue
            assert cell == "%.17g" % float(cell)


def test_report_numbers_trace_to_csv_cells(tmp_path):
    out = str(tmp_path / "heat")
    run_cli("run", HEAT, "--out", out)
    blob = ""
    for name in os.listdir(out):
        if name.endswith(".csv") and name != "timings.csv":
            blob += read_text(os.path.join(out, name))
    cells = set()
    for line in blob.splitlines():
        cells.update(line.split(","))
    report = read_text(os.path.join(out, "report.txt"))
    numbers = re.findall(r"-?\d+\.\d{10,}(?:e[+-]?\d+)?", report)
    assert numbers  # the report does quote numeric results
    for token in numbers:
        assert token in cells  # verbatim projection of a stored cell


def test_env_var_redirects_artifacts(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(cli.OUT_ENV_VAR, str(target))
    assert run_cli("run", HEAT) == cli.EXIT_OK
    assert (target / "trajectory.csv").exists()


# --- determinism and drift --------------------------------------------------

def test_reruns_are_byte_identical(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert run_cli("run", HEAT, "--out", a) == 0
    assert run_cli("run", HEAT, "--out", b) == 0
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b))
    for name in names:
        if name == "timings.csv":  # wall-clock seconds, legitimately varies
            continue
        assert read_text(os.path.join(a, name)) == \
            read_text(os.path.join(b, name)), name


def test_compare_reports_zero_drift_for_identical_runs(tmp_path, capsys):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    run_cli("run", HEAT, "--out", a)
    run_cli("run", HEAT, "--out", b)
    assert run_cli("compare", a, b) == cli.EXIT_OK
    assert "no drift" in capsys.readouterr().out
    rep = cli.compare_runs(a, b)
    assert rep.identical


def test_compare_detects_seed_drift(tmp_path):
    text = read_text(BAD_TRAITS)
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(text)
    run_cli("run", str(cfg), "--out", a, "--seed", "1")
    run_cli("run", str(cfg), "--out", b, "--seed", "2")
    rep = cli.compare_runs(a, b)
    assert not rep.identical
    assert rep.max_drift > 0


def test_compare_aligns_different_step_sizes(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    run_cli("run", HEAT, "--out", a)
    halved = tmp_path / "halved.toml"
    halved.write_text(read_text(HEAT).replace("dt = 1e-3", "dt = 5e-4"))
    run_cli("run", str(halved), "--out", b)
    rep = cli.compare_runs(a, b)
    assert not rep.identical
    # The step counts differ by construction, so restrict the drift check to
    # the trajectory norms, which are interpolated onto the coarser grid.
    assert any(d.file == "trajectory.csv" and d.column == "norm_H"
               and 0 < d.max_abs_diff < 1e-5 for d in rep.drifts)


def test_compare_rejects_mismatched_outputs(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    run_cli("run", HEAT, "--out", a)
    run_cli("run", BAD_TRAITS, "--out", b)
    with pytest.raises(ConfigurationError):
        cli.compare_runs(a, b)


# --- console entry point ----------------------------------------------------

def test_module_is_invocable_as_a_script(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "nlevo.cli", "run", HEAT,
         "--out", str(tmp_path / "sub")],
        capture_output=True, text=True)
    assert out.returncode == 0
    assert "solve: pass" in out.stdout
