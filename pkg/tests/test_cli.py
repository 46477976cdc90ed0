"""Tests for the command-line interface and its output files."""

import csv

from junctionq.cli import CommandOptions, main, run_command
from junctionq.config import STATE_CAP_ENV, load_config


def read_rows(path):
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def test_fit_report(tmp_path, capsys):
    """Mean 3 and cv 0.5 give a table of four phases at rate 4/3."""
    code = main(["fit-report", "--mean", "3", "--cv", "0.5", "--out", str(tmp_path)])

    assert code == 0
    assert "k=4" in capsys.readouterr().out
    rows = read_rows(tmp_path / "fit_report.csv")
    assert [row["phase"] for row in rows] == ["1", "2", "3", "4"]
    assert {row["rate"] for row in rows} == {"1.33333"}
    assert all(row["config_hash"] == load_config("case_study").config_hash() for row in rows)


def test_route_fit_report(tmp_path):
    code = main(["fit-report", "--config", "validation", "--out", str(tmp_path)])
    assert code == 0
    rows = read_rows(tmp_path / "route_fits.csv")
    assert [row["route"] for row in rows] == ["r1", "r2", "r3", "r4"]


def test_capacity_summary_and_reproducible_outputs(tmp_path, capsys):
    """Two identical runs write byte-identical files."""
    args = ["capacity", "--config", "validation", "--setting", "MM", "--scaling", "hertel"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    summary = capsys.readouterr().out
    assert main([*args, "--out", str(tmp_path / "b")]) == 0

    assert summary.startswith("n_max=")
    assert "bottleneck=r" in summary
    for name in ("capacity.json", "capacity_trace.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = read_rows(tmp_path / "a" / "capacity_trace.csv")[0].keys()
    assert "wall_time" not in header
    assert "phi" in header


def test_timings_add_wall_time(tmp_path):
    options = CommandOptions(out=tmp_path, timings=True)
    code = run_command(load_config("validation"), "capacity", options)
    assert code == 0
    assert "wall_time" in read_rows(tmp_path / "capacity_trace.csv")[0]


def test_sweep_records_failures(tmp_path, monkeypatch, capsys):
    """Scenarios that fail are reported and the exit status is nonzero."""
    monkeypatch.setenv(STATE_CAP_ENV, "10")
    code = main(["sweep", "--config", "validation", "--out", str(tmp_path)])

    assert code == 1
    rows = read_rows(tmp_path / "sweep.csv")
    assert len(rows) == 9
    assert all("state_space_too_large" in row["error"] for row in rows)
    assert "failed=9" in capsys.readouterr().out


def test_queue_lengths(tmp_path):
    code = main(
        ["queue-lengths", "--config", "validation", "--grid", "0,8", "--out", str(tmp_path)]
    )
    assert code == 0
    rows = read_rows(tmp_path / "queue_lengths.csv")
    assert len(rows) == 8
    assert {row["n_total"] for row in rows} == {"0", "8"}


def test_simulate(tmp_path):
    options = CommandOptions(out=tmp_path, traces=True, n_total=8.0)
    config = load_config("validation").model_copy(deep=True)
    config.simulation.horizon = 120.0
    config.simulation.replications = 2

    assert run_command(config, "simulate", options) == 0
    summary = read_rows(tmp_path / "simulate.csv")
    assert [row["route"] for row in summary] == ["r1", "r2", "r3", "r4"]
    trace = read_rows(tmp_path / "simulate_trace.csv")
    assert len(trace) == 2 * 120


def test_export_model(tmp_path):
    options = CommandOptions(out=tmp_path, setting=None, n_total=8.0)
    assert run_command(load_config("validation"), "export-model", options) == 0

    prism = (tmp_path / "model.prism").read_text(encoding="utf-8")
    assert prism.startswith("ctmc\n")
    assert 'rewards "queue_r3"' in prism
    assert prism.count("module route_") == 4
    edges = (tmp_path / "transitions.txt").read_text(encoding="utf-8").splitlines()
    assert len(edges) == 60_480
    assert len(read_rows(tmp_path / "states.csv")) == 10_368


def test_unknown_config(tmp_path, capsys):
    code = main(["capacity", "--config", str(tmp_path / "missing.json")])
    assert code == 1
    assert "invalid_config" in capsys.readouterr().err


def test_skipped_tables_fail_the_command(tmp_path, monkeypatch, capsys):
    """A state space left unchecked under a low cap is not reported as success."""
    monkeypatch.setenv(STATE_CAP_ENV, "20000")
    code = main(["validate-tables", "--tables", "state_spaces", "--out", str(tmp_path)])

    assert code == 1
    assert "checks=8 failed=0 skipped=6" in capsys.readouterr().out
    rows = {row["key"]: row for row in read_rows(tmp_path / "tables.csv")}
    assert rows["MM states"]["status"] == "passed"
    assert rows["MM transitions"]["status"] == "info"
    assert rows["PhPh states"]["status"] == "skipped"
