import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from asdn.cli import main, run_fig3

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(args, capsys):
    rc = main(args)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_bounds_maj_awgn(capsys):
    rc, out, _ = run(["bounds", "--spec", str(SPECS / "awgn.json"), "--bound", "maj"], capsys)
    assert rc == 0
    assert json.loads(out)["value"] == pytest.approx(2.302585093, abs=1e-9)


def test_bounds_all(capsys):
    rc, out, _ = run(["bounds", "--spec", str(SPECS / "fig2.json")], capsys)
    kinds = [r["kind"] for r in json.loads(out)["reports"]]
    assert rc == 0 and kinds == ["lower_maj", "lower_psi", "upper_symkl"]


def test_analyze(capsys):
    rc, out, _ = run(["analyze", "--spec", str(SPECS / "fading_c0_zero.json")], capsys)
    d = json.loads(out)
    assert rc == 0 and d["infinite_capacity"]["detected"] and not d["finite_capacity_guaranteed"]


def test_witness_csv(tmp_path, capsys):
    out = tmp_path / "w.csv"
    rc, text, _ = run(["witness", "--spec", str(SPECS / "sigma_x.json"), "-n", "20",
                       "--out", str(out)], capsys)
    rows = list(csv.DictReader(out.open()))
    assert rc == 0 and len(rows) == 20 and json.loads(text)["pairwise_disjoint"]


def test_oracle_small(capsys, tmp_path):
    pmf = tmp_path / "p.csv"
    rc, out, _ = run(["oracle", "--spec", str(SPECS / "fig2.json"), "-n", "16", "-m", "128",
                      "--dump-pmf", str(pmf), "--mc", "2000"], capsys)
    d = json.loads(out)
    assert rc == 0 and d["gap"] <= 1e-7 and "mc_estimate" in d
    assert len(pmf.read_text().splitlines()) == 17


def test_fig3_csv_format(tmp_path, capsys):
    out = tmp_path / "f.csv"
    rc, _, _ = run(["fig3", "--a-max", "10", "--steps", "2", "--no-oracle", "--out", str(out)], capsys)
    lines = out.read_text().splitlines()
    assert rc == 0 and lines[0] == "A,lower_maj,lower_psi,capacity_ba"
    assert lines[1].split(",")[0] == "5" and lines[2].split(",")[0] == "10"
    assert lines[2].split(",")[1] == "0.114319942"


def test_fig2_small(capsys):
    rc, out, _ = run(["fig2", "--c0-sq", "5,1", "-n", "24", "-m", "256"], capsys)
    rows = list(csv.DictReader(out.splitlines()))
    assert rc == 0 and [r["c0_sq"] for r in rows] == ["1", "5"]
    assert float(rows[0]["capacity_ba"]) <= float(rows[0]["upper_symkl"])


def test_sweep(capsys):
    rc, out, _ = run(["sweep", "--spec", str(SPECS / "fig2.json"), "--param", "sigma.c0_sq",
                      "--values", "2,0.5", "--compute", "bounds,analyze"], capsys)
    rows = json.loads(out)["rows"]
    assert rc == 0 and [r["value"] for r in rows] == [0.5, 2.0]
    assert rows[0]["upper_symkl"] == pytest.approx(7.9545454545, abs=1e-9)


def test_exit_codes(tmp_path, capsys):
    assert run(["bounds", "--spec", str(tmp_path / "missing.json")], capsys)[0] == 1
    assert run(["bounds"], capsys)[0] == 1
    assert run([], capsys)[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["analyze", "--spec", str(bad)], capsys)[0] == 1
    assert run(["oracle", "--spec", str(SPECS / "awgn.json")], capsys)[0] == 1
    assert run(["sweep", "--spec", str(SPECS / "fig2.json"), "--param", "sigma.nope",
                "--values", "1"], capsys)[0] == 1


def test_numerical_failure_exit_code(tmp_path, capsys):
    spec = json.loads((SPECS / "sigma_x.json").read_text())
    p = tmp_path / "s.json"
    p.write_text(json.dumps(spec))
    assert run(["witness", "--spec", str(p), "-n", "5000"], capsys)[0] == 2


def test_threads_env_keeps_order(monkeypatch):
    monkeypatch.setenv("ASDN_THREADS", "3")
    rows = run_fig3([20.0, 5.0, 10.0], oracle=False)
    assert [r["A"] for r in rows] == [5.0, 10.0, 20.0]


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "asdn", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "bounds" in r.stdout
