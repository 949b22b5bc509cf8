import csv
import io
import json

import numpy as np
import pytest

from steinkit.cli import main, parse_grid


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_student_kernel_table_with_negative_grid(capsys):
    rc, out, _ = run(capsys, "kernel", "--dist", "student", "--param", "nu=5",
                     "--grid", "-5:5:0.5")
    assert rc == 0
    table = rows(out)
    x = np.array([float(r["x"]) for r in table])
    tau = np.array([float(r["tau"]) for r in table])
    assert x[0] == -5 and x[-1] == 5
    np.testing.assert_allclose(tau, (x ** 2 + 5) / 4, rtol=1e-9)


def test_csv_uses_full_precision(capsys):
    rc, out, _ = run(capsys, "score", "--dist", "gaussian:sigma2=3", "--grid", "1:1:1")
    assert rc == 0
    assert rows(out)[0]["score"] == format(-1 / 3, ".17g")


def test_table_density_from_flags(capsys):
    rc, out, _ = run(capsys, "kernel", "--dist", "table", "--pmf", "0.5,0.5",
                     "--origin", "-1", "--spacing", "2")
    assert rc == 0
    assert [float(r["tau"]) for r in rows(out)] == [0.0, 1.0]


def test_solve_writes_residual(capsys):
    rc, out, _ = run(capsys, "solve", "--dist", "gaussian", "--h", "indicator:0.5",
                     "--grid", "-2:2:1")
    assert rc == 0
    table = rows(out)
    assert len(table) == 5
    assert "residual" in table[0]
    assert max(abs(float(r["residual"])) for r in table) < 1e-9


def test_compare_json(capsys):
    rc, out, _ = run(capsys, "compare", "--a", "gaussian", "--b", "student:nu=10",
                     "--method", "kernel", "--metric", "tv")
    assert rc == 0
    doc = json.loads(out)
    assert "schema_version" in doc
    assert doc["bound"] == pytest.approx(0.5, rel=1e-8)
    assert doc["oracle_distance"] < doc["bound"]


def test_case_sweep_parallel(capsys):
    rc, out, _ = run(capsys, "case", "gumbel", "--n", "2,10", "--jobs", "2")
    assert rc == 0
    table = rows(out)
    assert [int(r["n"]) for r in table] == [2, 10]
    assert float(table[1]["bound"]) == pytest.approx(1 / 11)


def test_case_json_file(capsys, tmp_path):
    path = tmp_path / "study.json"
    rc, _, _ = run(capsys, "case", "exp-max-uniform", "--n", "100", "--t", "0.5",
                   "--eps", "0,1", "--json", str(path))
    assert rc == 0
    doc = json.loads(path.read_text())
    assert doc["schema_version"]
    assert doc["study"] == "exp-max-uniform"
    bounds = [r["bound"] for pt in doc["points"] for r in pt["reports"]]
    assert len(bounds) == 2
    assert bounds[0] == pytest.approx(0.00497143, abs=2e-6)


def test_verify_suite(capsys):
    rc, out, _ = run(capsys, "verify", "--suite", "oracles")
    assert rc == 0
    assert all(line.startswith("PASS") for line in out.splitlines()[:-1])


def test_exit_codes(capsys):
    assert run(capsys, "kernel", "--dist", "nosuch")[0] == 2
    assert run(capsys, "kernel")[0] == 2
    assert run(capsys, "compare", "--a", "gaussian", "--b", "poisson:lam=2")[0] == 3
    assert run(capsys, "case", "rademacher", "--n", "100")[0] == 4
    assert run(capsys, "kernel", "--dist", "table", "--pmf", "0.5,0.6")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_parse_grid():
    np.testing.assert_allclose(parse_grid("-1:1:0.5"), [-1, -0.5, 0, 0.5, 1])
    with pytest.raises(Exception):
        parse_grid("1:0:0.1")


def test_formula_density_kernel(capsys):
    rc, out, _ = run(capsys, "kernel", "--dist", "expr", "--formula", "x*(1-x)^2",
                     "--support", "0,1", "--grid", "0.1:0.9:0.4")
    assert rc == 0
    table = rows(out)
    x = np.array([float(r["x"]) for r in table])
    np.testing.assert_allclose([float(r["tau"]) for r in table], x * (1 - x) / 5, rtol=1e-9)
