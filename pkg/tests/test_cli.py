import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from klsc import cli
from klsc.cli import RunConfig, main, run
from klsc.errors import ValidationError
from klsc.io import write_atomic

FS_ARGS = ["curvature", "--n", "2", "--E", "1/(1+z)^2", "--F", "1/(1+z)", "--annulus", "0.1", "10", "--grid", "64"]
PAIR_ARGS = ["klsc-from-pair", "--n", "2", "--F", "z+z^2", "--C", "0", "--annulus", "0", "inf"]


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_curvature_fubini_study_csv(capsys):
    code, out, _ = _run(FS_ARGS, capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 64
    for r in rows:
        assert float(r["S"]) == pytest.approx(12, rel=1e-10)
        assert float(r["S_C"]) == pytest.approx(6, rel=1e-10)
        assert abs(float(r["defect"])) < 1e-8


def test_klsc_from_pair_report(capsys, tmp_path):
    csv_path = tmp_path / "sweep.csv"
    code, out, _ = _run(PAIR_ARGS + ["--output", str(csv_path)], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["E(1)"] == pytest.approx(15.3547, abs=1e-4)
    assert rep["maxRelativeDefect"] <= 1e-6
    assert rep["pair"]["F"] == "z + z^2"
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    assert len(rows) == 100
    assert max(abs(float(r["defect"])) / (1 + abs(float(r["S"]))) for r in rows) <= 1e-6


def test_klsc_from_potential_writes_metric(capsys, tmp_path):
    metric = tmp_path / "m.json"
    code, out, _ = _run(["klsc-from-potential", "--phi", "z + log(z)", "--metric-output", str(metric)], capsys)
    assert code == 0 and out == ""
    rep = json.loads(metric.read_text())
    assert rep["gamma"] is None and rep["maxRelativeDefect"] <= 1e-6
    assert rep["metric"]["n"] == 2


def test_examples_fubini_study(capsys, tmp_path):
    code, out, _ = _run(["examples", "--which", "fubini-study", "--json", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    (rep,) = json.loads(out)
    assert rep["data"]["gamma"] == pytest.approx(1.763, abs=1e-3)
    assert len(rep["sweeps"]) == 2
    assert all(c["passed"] for c in rep["checks"])
    files = sorted(os.listdir(tmp_path))
    assert files == ["fubini-study-sweep0.csv", "fubini-study-sweep1.csv", "report.json"]


def test_examples_text_lines(capsys):
    code, out, _ = _run(["examples", "--which", "burns"], capsys)
    assert code == 0
    assert out.count("PASS burns:") >= 3 and "FAIL" not in out


def test_admissible_exit_codes(capsys):
    code, out, _ = _run(["admissible", "--F", "z+z^2"], capsys)
    assert code == 0 and out == "admissible\n"
    code, out, _ = _run(["admissible", "--F", "1", "--C", "1", "--json"], capsys)
    assert code == 2
    rep = json.loads(out)
    assert rep["admissible"] is False and 0.32 < rep["violation"] <= 1.0


def test_regularity_report(capsys):
    code, out, _ = _run(["regularity", "--F", "z^2+z^8", "--json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["smoothnessClass"] == "C^inf" and rep["quotientOrder"] == 3
    code, out, _ = _run(["regularity", "--F", "z+z^2"], capsys)
    assert code == 0 and "class C^1" in out and "log obstruction 2" in out


@pytest.mark.parametrize("argv", [
    ["curvature", "--E", "1 + (z", "--F", "1"],
    ["curvature", "--E", "sin(z)", "--F", "1"],
    ["curvature", "--E", "1", "--F", "1", "--grid", "4"],
    ["curvature", "--E", "1", "--F", "1", "--n", "1"],
    ["curvature", "--E", "1", "--F", "1", "--annulus", "2", "1"],
    ["klsc-from-pair", "--F", "exp(-z)", "--C", "100", "--basepoint", "1"],
    ["klsc-from-pair", "--F", "z", "--C", "abc"],
    ["curvature", "--E", "1", "--F", "1", "--quad-tol", "-1"],
])
def test_validation_failures_exit_2(argv, capsys):
    code, out, err = _run(argv, capsys)
    assert code == 2
    assert err.startswith("klsc: error:")


def test_internal_errors_exit_1(monkeypatch, capsys):
    def boom(cfg, out=None):
        raise RuntimeError("broken")

    monkeypatch.setattr(cli, "run", boom)
    code, _, err = _run(FS_ARGS, capsys)
    assert code == 1 and "internal error" in err


def test_run_config_validation():
    with pytest.raises(ValidationError):
        RunConfig("curvature", grid=15).validate()
    with pytest.raises(ValidationError):
        RunConfig("curvature", quad_tol=0.0).validate()
    RunConfig("curvature", grid=16, quad_tol=1e-9).validate()


def test_outputs_are_deterministic(tmp_path):
    outs = []
    for i in range(2):
        csv_path, js = tmp_path / f"s{i}.csv", tmp_path / f"m{i}.json"
        assert main(PAIR_ARGS + ["--output", str(csv_path), "--metric-output", str(js)]) == 0
        outs.append((csv_path.read_bytes(), js.read_bytes()))
    assert outs[0] == outs[1]


def test_atomic_write_replaces_and_cleans_up(tmp_path, monkeypatch):
    target = tmp_path / "out.txt"
    write_atomic(str(target), "first\n")
    write_atomic(str(target), "second\n")
    assert target.read_text() == "second\n"
    assert os.listdir(tmp_path) == ["out.txt"]

    def fail(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", fail)
    with pytest.raises(OSError):
        write_atomic(str(target), "third\n")
    assert target.read_text() == "second\n"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_quad_tol_is_passed_through_the_environment(monkeypatch, capsys):
    monkeypatch.setenv("KLSC_QUAD_TOL", "1e-10")  # restored after the test
    assert run(RunConfig("curvature", expressions={"E": "1", "F": "1"}, grid=16, quad_tol=1e-9)) == 0
    capsys.readouterr()
    assert os.environ["KLSC_QUAD_TOL"] == "1e-09"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "klsc", "admissible", "--F", "1", "--C", "1"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 2
    assert proc.stdout.startswith("not admissible: violation at z = ")
    assert math.isfinite(float(proc.stdout.split("= ")[1]))
