from __future__ import annotations

import csv
import hashlib
import json
import os

import pytest

from fracdual.cli import compare_runs, main, worker_count


@pytest.fixture(autouse=True)
def _in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def reports(path):
    return {r["name"]: r for r in json.loads((path / "reports.json").read_text())}


def test_counterexample_command(tmp_path, capsys):
    assert main(["counterexample", "--alpha", "0.5", "--R", "100", "--output", "out"]) == 0
    line = capsys.readouterr().out
    assert "[ok] counterexample: inconclusive (expected inconclusive)" in line
    rep = reports(tmp_path / "out" / "counterexample")["counterexample"]
    assert rep["data"]["min_dalpha"] >= -1e-6
    assert rep["data"]["min_u"] == pytest.approx(-1.0)
    head = (tmp_path / "out" / "counterexample" / "counterexample_u.dat").read_text().splitlines()[0]
    assert head.startswith("# t ")


def test_zero_simulate_writes_zero_csv_and_manifest(tmp_path):
    assert main(["simulate", "--output", "out"]) == 0
    root = tmp_path / "out" / "simulate"
    with open(root / "trajectory.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(float(r["u"]) == 0.0 for r in rows)
    man = json.loads((root / "MANIFEST").read_text())
    assert man["complete"] and man["error"] is None
    listed = {e["path"] for e in man["files"]}
    assert listed == {p.name for p in root.iterdir()} - {"MANIFEST"}
    for e in man["files"]:
        data = (root / e["path"]).read_bytes()
        assert e["bytes"] == len(data) and e["sha256"] == hashlib.sha256(data).hexdigest()
    assert (root / "final_profile.dat").read_text().startswith("# x u\n")


def test_runs_are_deterministic(tmp_path):
    assert main(["simulate", "--output", "a"]) == 0
    assert main(["simulate", "--output", "b"]) == 0
    for name in ("trajectory.csv", "reports.json", "final_profile.dat"):
        assert (tmp_path / "a/simulate" / name).read_bytes() == (tmp_path / "b/simulate" / name).read_bytes()
    assert compare_runs(tmp_path / "a/simulate", tmp_path / "b/simulate", 0.0, 0.0) == []


def test_check_round_trip(tmp_path, capsys):
    assert main(["counterexample", "--output", "out"]) == 0
    assert main(["counterexample", "--output", "out", "--check"]) == 0
    assert "ok" in capsys.readouterr().out
    assert main(["counterexample", "--output", "out", "--check", "--R", "50"]) == 4


def test_check_without_stored_run():
    assert main(["counterexample", "--output", "nothing", "--check"]) == 2


def test_validation_exit_code(capsys):
    assert main(["counterexample", "--alpha", "1.2"]) == 3
    assert "problem.frac_params.alpha" in capsys.readouterr().err


def test_parse_exit_codes(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("command: [")
    assert main(["--config", str(bad)]) == 2
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 2


def test_missing_command_is_a_validation_error():
    assert main([]) == 3


def test_expectation_mismatch(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("command: counterexample\nexpectations:\n  counterexample: holds\noutput_dir: out\n")
    assert main(["--config", str(cfg)]) == 4
    assert "[MISMATCH] counterexample" in capsys.readouterr().out


def test_pipeline_exception_is_qualified(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "command: moving-plane\noutput_dir: out\n"
        "problem:\n  grid: {x_min: 0.0, x_max: 2.0, n: 11, domain_kind: interval}\n"
        "  solve: {dt: 0.1, n_steps: 2}\n"
    )
    assert main(["--config", str(cfg)]) == 5
    assert capsys.readouterr().err.startswith("error: fracdual.")
    man = json.loads((tmp_path / "out/moving-plane/MANIFEST").read_text())
    assert man["complete"] is False and man["error"]


def test_random_suite_via_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "simulate", "output_dir": "out", "seed": 3, "experiment": {"random_runs": 3}}))
    assert main(["--config", str(cfg)]) == 0
    rep = reports(tmp_path / "out/simulate")["random_max_principle"]
    assert rep["data"]["runs"] == 6 and rep["conclusion"]["verdict"] == "holds"


def test_report_summarizes_runs(tmp_path):
    assert main(["counterexample", "--output", "out"]) == 0
    assert main(["narrow-region", "--output", "out"]) == 0
    assert main(["report", "--output", "out"]) == 0
    text = (tmp_path / "out/report/summary.csv").read_text()
    assert "counterexample" in text and "narrow_region" in text


@pytest.mark.parametrize("value, expected", [("1", 1), ("0", None), ("x", None), ("", None)])
def test_thread_count(monkeypatch, value, expected):
    monkeypatch.setenv("FRACDUAL_THREADS", value)
    cpus = os.cpu_count() or 1
    assert worker_count() == (min(expected, cpus) if expected else cpus)
