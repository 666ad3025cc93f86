import csv
import json
import subprocess
import sys

import pytest

from analytic_ore import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_analyze_power(capsys, k):
    code, rep = report(capsys, "analyze", "--h", f"y^{k + 1}")
    assert code == 0
    assert rep["zeros"] == [{"lambda": [0.0, 0.0], "order": k + 1, "s": "1" if k == 1 else f"1/{k}"}]
    assert rep["trivial"] is False


def test_analyze_constant_is_trivial(capsys):
    code, rep = report(capsys, "analyze", "--h", "1")
    assert code == 0
    assert rep["zeros"] == [] and rep["trivial"] is True
    assert "trivial" in rep["diagnostic"]


def test_analyze_sinh_spec(capsys, tmp_path):
    spec = tmp_path / "h.json"
    spec.write_text(json.dumps({"type": "builtin", "name": "sinh_deformation", "hbar": [0.5, 0], "window": 2}))
    code, rep = report(capsys, "analyze", "--spec", str(spec))
    assert code == 0
    assert len(rep["zeros"]) == 5
    assert all(z["order"] == 1 and z["s"] == "inf" for z in rep["zeros"])


def test_analyze_sinh_expression(capsys):
    code, rep = report(capsys, "analyze", "--h", "sinh_deformation(0.5)", "--window", "1")
    assert code == 0 and len(rep["zeros"]) == 3


def test_spec_parse_error_has_position(capsys, tmp_path):
    spec = tmp_path / "bad.json"
    spec.write_text('{\n  "type": "polynomial",\n  "coeffs": [1, 2,\n}\n')
    code, out, err = run(capsys, "analyze", "--spec", str(spec))
    assert code == 2 and out == ""
    assert f"{spec}:4:1:" in err


def test_declared_zero_with_wrong_order_warns(capsys, tmp_path):
    spec = tmp_path / "h.json"
    spec.write_text(json.dumps({"type": "polynomial", "coeffs": [0, 0, 1],
                                "zeros": [{"lambda": [0, 0], "order": 1}]}))
    code, rep = report(capsys, "analyze", "--spec", str(spec))
    assert rep["warnings"] and rep["zeros"] == []


@pytest.mark.parametrize("expr", ["y^", "sin(y)", "x*y"])
def test_bad_expressions(capsys, expr):
    code, _, err = run(capsys, "analyze", "--h", expr)
    assert code == 2 and "error" in err


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["analyze", "--h", "y", "--frobnicate"])
    assert exc.value.code == 2


def test_ore_check(capsys):
    code, rep = report(capsys, "ore-check", "--h", "y^2", "--N", "32")
    assert code == 0
    assert rep["ore_check"]["ok"] and rep["ore_check"]["deviation"] <= 1e-12


def test_stability_deterministic(capsys):
    args = ["stability", "--h", "z*(z-1)^2", "--trials", "20", "--seed", "3", "--r", "0.5,2"]
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    rep = json.loads(out1)
    assert rep["config"]["seed"] == 3
    assert rep["stability"]["ok"] and len(rep["stability"]["certificates"]) == 4
    assert rep["stability"]["formal"][0]["zero"]["order"] == 1


def test_report_round_trip(capsys):
    code, out, _ = run(capsys, "report", "--h", "y^2", "--suites", "ore-check,jordan", "--N", "16", "--pairs", "5")
    assert code == 0
    rep = json.loads(out)
    assert cli.dumps(rep) == out.rstrip("\n")
    assert set(rep) >= {"version", "config", "function", "zeros", "ore_check", "jordan", "failures"}


def test_report_unknown_suite(capsys):
    code, _, err = run(capsys, "report", "--h", "y", "--suites", "bogus")
    assert code == 2


def test_jordan_obstruction(capsys):
    code, rep = report(capsys, "jordan", "--h", "1")
    assert code == 0
    assert all(r["trace_obstruction"] for r in rep["jordan"]["representations"])


def test_jordan_feasible(capsys):
    code, rep = report(capsys, "jordan", "--h", "y^3", "--dim", "6", "--pairs", "10")
    assert code == 0
    (r,) = rep["jordan"]["representations"]
    assert r["feasible"] and r["homomorphism_defect"] <= 1e-8


def test_jordan_away_from_zero_is_obstructed(capsys):
    # away from the zeros the obstruction is the expected outcome, so the contract holds
    code, rep = report(capsys, "jordan", "--h", "y^2", "--lambda", "1", "--dim", "4")
    assert rep["jordan"]["representations"][0]["trace_obstruction"]
    assert code == 0


def test_volterra_csv(capsys, tmp_path):
    code, rep = report(capsys, "volterra", "--grid", "2000", "--nmax", "40", "--out", str(tmp_path))
    assert code == 0 and rep["volterra"]["ok"]
    with open(tmp_path / "volterra.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 40
    assert list(rows[0]) == ["n", "norm", "n_factorial_scaled"]
    assert json.loads((tmp_path / "volterra.json").read_text()) == rep


def test_out_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    code, _, _ = run(capsys, "analyze", "--h", "y")
    assert code == 0
    assert (tmp_path / "env" / "analyze.json").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "analytic_ore", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()


def test_non_finite_values_serialize():
    assert json.loads(cli.dumps({"a": float("inf"), "b": 1 + 2j})) == {"a": "inf", "b": [1.0, 2.0]}
