import csv
import io
import json
import math
import subprocess
import sys

import pytest

from holomet.cli import parse_complex, parse_point, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_point_syntax():
    assert parse_complex("0.5") == 0.5
    assert parse_complex("-1e-3") == -1e-3
    assert parse_complex("0.3+0.2i") == 0.3 + 0.2j
    assert parse_complex("0.1-2i") == 0.1 - 2j
    assert parse_complex("0.4i") == 0.4j
    assert list(parse_point("0.5,0,-0.1+0.2i")) == [0.5, 0, -0.1 + 0.2j]


def test_distance_hilbert_example():
    code, out, _ = call("distance", "--p", "2", "--n", "2", "--x", "0.5,0", "--y", "0,0.5")
    assert code == 0
    d = json.loads(out)
    assert d["s"] == pytest.approx(math.sqrt(7) / 4, abs=1e-11)
    assert d["distance"] == pytest.approx(math.atanh(math.sqrt(7) / 4), abs=1e-11)


def test_distance_polydisc_example():
    code, out, _ = call("distance", "--p", "inf", "--n", "2", "--x", "0,0", "--y", "0.5,0.2")
    assert code == 0
    assert json.loads(out)["distance"] == pytest.approx(0.549306144334, abs=1e-12)
    code, out, _ = call("polydisc", "--x", "0,0", "--y", "0.5,0.2i")
    assert json.loads(out)["distance"] == pytest.approx(math.atanh(0.5), abs=1e-12)


def test_twelve_significant_digits():
    _, out, _ = call("distance", "--p", "1.5", "--x", "0.3,0.1i", "--y", "-0.2,0.4")
    d = json.loads(out)["distance"]
    assert len(repr(d).replace(".", "").lstrip("0")) <= 12


def test_negative_coordinates_are_values():
    code, out, _ = call("distance", "--p", "2", "--x", "-0.5,0", "--y", "0,-0.5")
    assert code == 0
    assert json.loads(out)["s"] == pytest.approx(math.sqrt(7) / 4, abs=1e-11)


def test_solve_verify_round_trip(tmp_path):
    for p, x, y in (("1", "0.4,0", "0,0.4"), ("1.5", "0.3,0.2i,0", "-0.1,0.4,0.2"), ("3", "0.5,0.1", "-0.3,0.6i")):
        code, out, _ = call("solve", "--p", p, "--x", x, "--y", y)
        assert code == 0
        path = tmp_path / f"geod_{p}.json"
        path.write_text(out)
        code, out, err = call("verify", "--params", str(path))
        assert code == 0, err
        rep = json.loads(out)
        assert rep["passed"] is True
        assert rep["poisson_min_real"] > 0


def test_verify_failure_exit_code(tmp_path):
    bad = {"p": 2, "gamma": [0, 0], "alpha": [[0, 0], [0, 0]], "beta": [1, 1], "c": [[1, 0], [1, 0]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out, _ = call("verify", "--params", str(path))
    assert code == 4
    assert json.loads(out)["passed"] is False


def test_input_errors_exit_2():
    for argv in (
        ("distance", "--x", "1.2,0", "--y", "0,0.5"),
        ("distance", "--x", "0.1,zz", "--y", "0,0.5"),
        ("distance", "--x", "0.1,0.1", "--y", "0.1,0.1,0.1"),
        ("distance", "--x", "0.1,0.1", "--y", "0.1,0.2", "--p", "0.5"),
        ("solve", "--x", "0.1,0.1", "--y", "0.1,0.1"),
        ("frobnicate",),
        ("verify", "--params", "/nonexistent.json"),
    ):
        code, out, err = call(*argv)
        assert code == 2, argv
        assert out == ""
        assert "error" in json.loads(err)


def test_nonconvergence_exit_3():
    code, _, err = call("solve", "--p", "1.5", "--x", "0.3,0.2", "--y", "-0.4,0.1i",
                        "--tol", "1e-40", "--beta", "ones", "--multistarts", "1")
    assert code == 3
    assert "error" in json.loads(err)


def test_determinism_byte_identical():
    argv = ("solve", "--p", "1.5", "--x", "0.3,0.2i,0.1", "--y", "-0.2,0.4,0", "--seed", "3")
    assert call(*argv)[1] == call(*argv)[1]


def test_modulus_csv():
    code, out, _ = call("modulus", "--p", "1", "--n", "2", "--eps", "0.1,0.01", "--trials", "4", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["epsilon"] for r in rows] == ["0.1", "0.01"]
    assert set(rows[0]) == {"epsilon", "delta", "omega_c", "slope"}
    assert float(rows[1]["delta"]) < float(rows[0]["delta"])


def test_curvature_single_and_table():
    code, out, _ = call("curvature", "--p", "2", "--x", "0.2,0.1", "--v", "1,1")
    assert code == 0
    assert json.loads(out)["curvature"] == pytest.approx(-4, abs=5e-3)
    code, out, _ = call("curvature", "--p", "3", "--n", "2", "--count", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2 and all(abs(float(r["curvature"]) + 4) < 5e-3 for r in rows)


def test_direct_sum_distance():
    code, out, _ = call("distance", "--p1", "1", "--n1", "1", "--p2", "2", "--n2", "2", "--r", "3",
                        "--x", "0.3,0.1,0", "--y", "0,0.2,0.3i")
    assert code == 0
    d = json.loads(out)
    assert d["lower"] <= d["distance"] <= d["upper"]
    assert d["upper"] - d["lower"] < 1e-4


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "holomet.cli", "polydisc", "--x", "0,0", "--y", "0.5,0"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["distance"] == pytest.approx(math.atanh(0.5), abs=1e-12)


def test_threads_env_does_not_change_output(monkeypatch):
    argv = ("solve", "--p", "2", "--x", "0.3,0.1", "--y", "-0.2,0.4")
    base = call(*argv)[1]
    monkeypatch.setenv("HOLOMET_THREADS", "4")
    assert call(*argv)[1] == base
