"""Command-line interface: outputs, exit codes, determinism, model files."""

import csv
import io
import json

import numpy as np
import pytest

from polylin import cli
from polylin.core import PolygonalFunction
from polylin.fit import FitReport
from polylin.partition import uniform_partition


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_partition_uniform_csv(capsys):
    code, out, err = run(
        capsys, "partition", "--function", "gaussian", "--segments", "4"
    )
    assert code == 0 and err == ""
    rows = rows_of(out)
    assert [r["index"] for r in rows] == ["0", "1", "2", "3", "4"]
    assert [float(r["knot"]) for r in rows] == [0.0, 1.0, 2.0, 3.0, 4.0]


def test_partition_optimized_to_file(tmp_path, capsys):
    out_file = tmp_path / "knots.csv"
    code, _out, _err = run(
        capsys,
        "partition",
        "--function",
        "gaussian",
        "--segments",
        "8",
        "--partition",
        "optimized",
        "--out",
        str(out_file),
    )
    assert code == 0
    knots = np.array([float(r["knot"]) for r in rows_of(out_file.read_text())])
    assert knots[0] == 0.0 and knots[-1] == 4.0
    assert np.all(np.diff(knots) > 0.0)
    assert np.max(np.abs(knots - np.linspace(0.0, 4.0, 9))) > 1e-3


def test_interval_and_polynomial_function(capsys):
    code, out, _err = run(
        capsys,
        "partition",
        "--function",
        "poly:0,0,1",
        "--interval",
        "0",
        "2",
        "--segments",
        "2",
    )
    assert code == 0
    assert [float(r["knot"]) for r in rows_of(out)] == [0.0, 1.0, 2.0]


def test_fit_writes_model_and_error_round_trips(tmp_path, capsys):
    model_path = tmp_path / "model.json"
    code, _out, _err = run(
        capsys,
        "fit",
        "--function",
        "gaussian",
        "--segments",
        "8",
        "--fit",
        "l1",
        "--format",
        "json",
        "--out",
        str(model_path),
    )
    assert code == 0
    model = json.loads(model_path.read_text())
    assert model["schema"] == 1 and model["kind"] == "polylin-model"
    assert len(model["knots"]) == 9 and len(model["ordinates"]) == 9
    assert model["fit"]["report"]["converged"] is True
    assert model["cost"] > 0.0

    code, out, _err = run(capsys, "error", "--model", str(model_path))
    assert code == 0
    row = rows_of(out)[0]
    assert int(row["n_segments"]) == 8
    assert float(row["difference"]) <= 1e-12


def test_fit_refuses_csv(capsys):
    code, _out, err = run(
        capsys, "fit", "--function", "gaussian", "--segments", "4", "--format", "csv"
    )
    assert code == 2
    assert "json" in err


def test_error_reports_measured_and_bounds(capsys):
    code, out, _err = run(
        capsys, "error", "--function", "gaussian", "--segments", "63"
    )
    assert code == 0
    row = rows_of(out)[0]
    measured = float(row["measured"])
    bound = float(row["bound_uniform_interpolant"])
    assert measured <= bound * 1.05
    assert set(row) >= {
        "function",
        "n_segments",
        "partition",
        "fit",
        "measured",
        "bound_uniform_interpolant",
        "bound_optimized_interpolant",
        "bound_uniform_best_l1",
        "bound_optimized_best_l1",
    }


def test_plan_matches_frozen_counts(capsys):
    code, out, _err = run(
        capsys, "plan", "--function", "gaussian", "--tolerance", "1e-5"
    )
    assert code == 0
    counts = {r["kind"]: int(r["n_segments"]) for r in rows_of(out)}
    assert counts == {
        "uniform_interpolant": 254,
        "optimized_interpolant": 213,
        "uniform_best_l1": 156,
        "optimized_best_l1": 130,
    }


def test_reproduce_gain_is_deterministic(capsys):
    code1, out1, _ = run(capsys, "reproduce", "gain")
    code2, out2, _ = run(capsys, "reproduce", "gain")
    assert code1 == 0 and code2 == 0
    assert out1 == out2
    rows = rows_of(out1)
    assert len(rows) == 16
    final = rows[-1]
    assert float(final["b"]) == 8.0
    assert 0.9 * 0.077 <= float(final["gain_over_b_squared"]) <= 1.1 * 0.077


def test_reproduce_small_sweep(capsys):
    code, out, _err = run(
        capsys, "reproduce", "gaussian04", "--n-values", "15"
    )
    assert code == 0
    row = rows_of(out)[0]
    assert int(row["n_segments"]) == 15
    assert 0.30 <= float(row["ratio_uniform"]) <= 0.45
    assert float(row["best_l1_uniform"]) <= float(row["interp_uniform"])


def test_config_errors_exit_2(tmp_path, capsys):
    code, _out, err = run(
        capsys, "partition", "--function", "sinc", "--segments", "4"
    )
    assert code == 2 and "unknown function" in err

    code, _out, err = run(
        capsys,
        "partition",
        "--function",
        "gaussian",
        "--segments",
        "4",
        "--tolerance",
        "1e-3",
    )
    assert code == 2 and "mutually exclusive" in err

    junk = tmp_path / "junk.json"
    junk.write_text("{\"kind\": \"other\"}")
    code, _out, err = run(capsys, "error", "--model", str(junk))
    assert code == 2

    code, _out, err = run(capsys, "error", "--model", str(tmp_path / "missing.json"))
    assert code == 2

    code, _out, err = run(
        capsys,
        "partition",
        "--function",
        "expr:sin(",
        "--interval",
        "0",
        "1",
        "--segments",
        "2",
    )
    assert code == 2

    code, _out, err = run(
        capsys, "bench", "--function", "gaussian", "--segments", "4", "--n-evals", "99"
    )
    assert code == 2 and "at least" in err


def test_unconverged_fit_exits_3(capsys, monkeypatch):
    report = FitReport(
        iterations=1,
        final_cost=1.0,
        final_gradient_norm=1.0,
        converged=False,
        function_evals=1,
        stage_function_evals=(1,),
    )

    def fake_fit(f, p, opts=None):
        return PolygonalFunction(p, np.zeros(len(p))), report

    monkeypatch.setattr(cli.fit, "best_l1_fit", fake_fit)
    code, _out, err = run(
        capsys, "error", "--function", "gaussian", "--segments", "4", "--fit", "l1"
    )
    assert code == 3 and "converge" in err


def test_quadrature_tolerance_env(capsys, monkeypatch):
    monkeypatch.setenv("POLYLIN_QUAD_TOL", "oops")
    code, _out, err = run(
        capsys, "plan", "--function", "gaussian", "--tolerance", "1e-5"
    )
    assert code == 2 and "POLYLIN_QUAD_TOL" in err

    monkeypatch.setenv("POLYLIN_QUAD_TOL", "1e-10")
    code, _out, _err = run(
        capsys, "plan", "--function", "gaussian", "--tolerance", "1e-5"
    )
    assert code == 0


def test_bench_single_row_smoke(capsys):
    code, out, _err = run(
        capsys,
        "bench",
        "--function",
        "gaussian",
        "--segments",
        "15",
        "--n-evals",
        "100000",
    )
    assert code == 0
    rows = rows_of(out)
    assert [r["mode"] for r in rows] == ["uniform_direct", "binary_search"]
    for r in rows:
        assert float(r["mean_ns"]) > 0.0
        assert int(r["n_evals"]) == 100000
