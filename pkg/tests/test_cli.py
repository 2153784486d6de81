import csv
import json

import pytest

from toricbell.cli import main


def run(argv, tmp_path):
    report = tmp_path / "report.json"
    code = main([*argv, "--report", str(report)])
    return code, (json.loads(report.read_text()) if report.exists() else None)


def test_build_then_quantum_bound(tmp_path):
    expr = tmp_path / "e.json"
    code, rep = run(["build", "--L", "3", "--d", "3", "--special", "1,2", "--out", str(expr)], tmp_path)
    assert code == 0 and rep["results"]["terms"] == 58
    code, rep = run(["quantum-bound", "--expr", str(expr), "--sector", "all"], tmp_path)
    assert code == 0
    assert set(rep["results"]["expectations"].values()) == {40.0}


def test_local_bound_certify(tmp_path):
    expr = tmp_path / "e.json"
    main(["build", "--L", "4", "--d", "3", "--special", "1,0", "--out", str(expr)])
    code, rep = run(["local-bound", "--expr", str(expr), "--certify", "--random-iters", "2000"], tmp_path)
    assert code == 0
    res = rep["results"]
    assert res["strategy_max"] == res["beta_max"] and res["strategy_min"] == res["beta_min"]
    assert rep["certified"] == {"tile": True, "tight": True}


def test_results_are_deterministic(tmp_path):
    expr = tmp_path / "e.json"
    main(["build", "--L", "3", "--d", "5", "--special", "1,2", "--out", str(expr)])
    a = run(["local-bound", "--expr", str(expr), "--random-iters", "3000", "--seed", "4"], tmp_path)[1]
    b = run(["local-bound", "--expr", str(expr), "--random-iters", "3000", "--seed", "4"], tmp_path)[1]
    assert a["results"] == b["results"]
    assert a["certified"] == {"tile": False, "local_max_equals_quantum": True}
    assert a["results"]["beta_max"] == a["results"]["quantum_bound"] == 48.0


def test_verify_sos(tmp_path):
    code, rep = run(["verify-sos", "--L", "3", "--d", "3", "--special", "1,2",
                     "--party-dim", "1", "--trials", "2"], tmp_path)
    assert code == 0 and rep["results"]["residual_below_tol"]


def test_tile_decompose(tmp_path):
    cells = tmp_path / "cells.txt"
    cells.write_text("# a plus with a tail\n1 0\n0 1\n1 1\n2 1\n1 2\n1 3\n1 4\n")
    code, rep = run(["tile-decompose", "--cells", str(cells)], tmp_path)
    assert code == 0 and rep["results"]["valid"]
    assert sum(len(t["cells"]) for t in rep["results"]["tiles"]) == 7


def test_ratio_csv(tmp_path):
    out = tmp_path / "ratio.csv"
    code, rep = run(["ratio", "--N", "200", "--R-range", "0:5", "--out", str(out)], tmp_path)
    rows = list(csv.DictReader(out.open()))
    assert code == 0 and rep["results"]["strictly_increasing"]
    assert float(rows[0]["Lambda"]) == 1.0 and len(rows) == 6
    assert all(r["Lambda"] == r["Lambda_closed_form"] for r in rows)


@pytest.mark.parametrize("argv", [
    ["build", "--L", "3", "--d", "4"],
    ["build", "--L", "5", "--d", "3", "--special", "1,0;1,2"],
    ["quantum-bound", "--expr", "/nonexistent.json"],
    ["ratio", "--d", "5"],
    ["ratio", "--R-range", "3"],
    ["frobnicate"],
])
def test_usage_errors(argv, tmp_path):
    assert main(argv) == 2


def test_tampered_expression_rejected(tmp_path):
    expr = tmp_path / "e.json"
    main(["build", "--L", "3", "--d", "3", "--special", "1,2", "--out", str(expr)])
    data = json.loads(expr.read_text())
    data["terms"][0]["re"] += 1.0
    expr.write_text(json.dumps(data))
    assert main(["quantum-bound", "--expr", str(expr)]) == 2


def test_global_flags_before_subcommand(tmp_path):
    report = tmp_path / "r.json"
    assert main(["--threads", "1", "--report", str(report), "ratio", "--R-range", "0:1"]) == 0
    assert json.loads(report.read_text())["command"] == "ratio"
