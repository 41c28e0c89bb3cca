import csv
import io
import json
import math
from pathlib import Path

import pytest

from latwalk import cli

GOLDEN = Path(__file__).parent / "golden"


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_search_json_schema(capsys):
    code, out, _ = run(["search", "--rows", "16", "--cols", "16", "--s", "auto", "--steps", "auto",
                        "--format", "json"], capsys)
    assert code == 0 and out.endswith("\n") and out.count("\n") == 1
    data = json.loads(out)
    assert set(data) == {"n", "N", "s", "policy", "steps", "p_peak", "peak_step", "phi1", "beta"}
    assert data["N"] == 256 and data["s"] == 1 - 1 / 257 and data["steps"] == 13
    assert data["p_peak"] == pytest.approx(0.9723896211309685, abs=1e-12)


def test_search_trajectory_csv(capsys):
    code, out, _ = run(["search", "--rows", "8", "--steps", "4", "--format", "csv", "--marked", "3,5"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["step", "p_selfloop", "p_marked", "norm_drift"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3", "4"]


@pytest.mark.parametrize("walk", ["intermediate", "baseline"])
def test_search_other_walks(walk, capsys):
    code, out, _ = run(["search", "--rows", "8", "--walk", walk], capsys)
    assert code == 0
    assert json.loads(out)["steps"] > 0


def test_search_scan(capsys):
    code, out, _ = run(["search", "--rows", "16", "--scan"], capsys)
    data = json.loads(out)
    assert code == 0 and data["policy"] == "scan" and data["steps"] == 26


@pytest.mark.parametrize("argv", [
    ["search", "--rows", "15", "--cols", "16"],
    ["search", "--rows", "8", "--cols", "16"],
    ["secular", "--rows", "8", "--cols", "12"],
    ["search", "--rows", "8", "--marked", "8,0"],
    ["search", "--rows", "8", "--marked", "nope"],
    ["search", "--rows", "8", "--s", "2"],
    ["search", "--rows", "8", "--steps", "-3"],
    ["scaling"],
    ["scaling", "--sweep", ""],
    ["scaling", "--sweep", "16,15"],
])
def test_configuration_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == "" and "configuration error" in err


def test_numeric_error_exit_3(capsys):
    code, _, err = run(["secular", "--rows", "2"], capsys)
    assert code == 3 and "numeric error" in err


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("LATWALK_THREADS", "zero")
    code, _, _ = run(["scaling", "--sweep", "8"], capsys)
    assert code == 2


def test_spectra_csv(capsys):
    code, out, _ = run(["spectra", "--rows", "8", "--cols", "12"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4 * 6
    assert list(rows[0]) == ["k", "l", "theta_kl", "dim", "subspace_id"]
    assert rows[0]["dim"] == str(8 * 12 // 2 + 3) and rows[0]["subspace_id"] == "0"


def test_secular_json(capsys):
    code, out, _ = run(["secular", "--rows", "16"], capsys)
    data = json.loads(out)
    assert code == 0
    assert list(data) == ["N", "s", "phi1", "beta", "g0_sq", "g1_sq", "overlap_WF1", "overlap_WF",
                          "sum_S0", "sum_S4"]
    assert data["beta"] < data["phi1"] < math.pi / 4
    assert data["g0_sq"] == pytest.approx(0.507804811579282, abs=1e-12)


def test_numbers_have_17_digits():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert float(cli.fmt(math.pi)) == math.pi
    assert cli.to_json({"a": [1, 2.5, None, True]}) == '{"a": [1, 2.5, null, true]}'


def test_scaling_small_sweep(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LATWALK_THREADS", "2")
    out = tmp_path / "scaling.csv"
    assert cli.main(["scaling", "--sweep", "16,32,64", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["N"] for r in rows] == ["256", "1024", "4096"]
    p = [float(r["p_peak"]) for r in rows]
    assert p[0] < p[1] < p[2]
    band = [float(r["phi1_sqrtNlogN"]) for r in rows]
    assert max(band) / min(band) <= 2
    assert not list(tmp_path.glob(".latwalk-*"))


def test_verify_matches_golden_report(tmp_path):
    out = tmp_path / "verify.json"
    assert cli.main(["verify", "--rows", "8", "--cols", "8", "--out", str(out)]) == 0
    got = json.loads(out.read_text())
    want = json.loads((GOLDEN / "verify_8x8.json").read_text())
    assert got["passed"] and want["passed"]
    assert [c["check"] for c in got["checks"]] == [c["check"] for c in want["checks"]]
    for g, w in zip(got["checks"], want["checks"]):
        assert g["tolerance"] == w["tolerance"] and g["passed"]
        assert g["max_deviation"] <= max(g["tolerance"], 1e-15)
        assert abs(g["max_deviation"] - w["max_deviation"]) <= 1e-13


def test_verify_rectangular_csv(capsys):
    code, out, _ = run(["verify", "--rows", "6", "--cols", "10", "--marked", "1,3", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and all(r["passed"] == "true" for r in rows)


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "latwalk", "search", "--rows", "15"],
                         capture_output=True, text=True)
    assert res.returncode == 2
