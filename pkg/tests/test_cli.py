from __future__ import annotations

import json

import numpy as np
import pandas as pd
import pytest

import main
from tests.conftest import FIXTURES

STAR = str(FIXTURES / "star.json")
PATH = str(FIXTURES / "path.json")


def _run(*argv) -> int:
    return main.main([str(a) for a in argv])


def test_auto_w_on_star(tmp_path):
    out = tmp_path / "r.json"
    code = _run("solve", STAR, "--K", 2, "--monitors", 2, "--fail-budget", 1, "--auto-w",
                "--no-timings", "-o", out)
    assert code == main.EXIT_OK
    result = json.loads(out.read_text())
    assert result["schema"] == 1
    assert result["status"] == "optimal"
    assert result["tau"] == 1
    assert result["W"] == 0.0
    assert sum(result["x"]) == 2
    assert [g["worst_case_covered"] for g in result["groups"]] == [1, 0]
    assert result["timings"] == {}


@pytest.mark.parametrize("solver,worst", [("benders", 2), ("monolithic", 2), ("oracle", 2), ("greedy", 1)])
def test_no_timings_output_is_reproducible(tmp_path, solver, worst):
    paths = [tmp_path / f"{solver}_{i}.json" for i in range(2)]
    for p in paths:
        assert _run("solve", PATH, "-I", 2, "-J", 1, "--K", 2, "--solver", solver, "--no-timings", "-o", p) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert json.loads(paths[0].read_text())["worst_case_total"] == worst


def test_benders_trace_file(tmp_path):
    trace = tmp_path / "trace.jsonl"
    assert _run("solve", STAR, "-I", 2, "-J", 1, "--K", 2, "--log", trace, "-o", tmp_path / "r.json") == 0
    assert trace.read_text().count("\n") >= 1


def test_result_goes_to_stdout(capsys):
    assert _run("solve", PATH, "-I", 2, "--solver", "dc", "--no-timings") == 0
    assert json.loads(capsys.readouterr().out)["x"] == [0, 1, 1, 0]


def test_bad_json_is_an_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nodes": [')
    assert _run("solve", bad, "-I", 1) == main.EXIT_INPUT
    assert "bad.json:1:" in capsys.readouterr().err


def test_infeasible_floor_level():
    assert _run("solve", STAR, "-I", 2, "-J", 1, "--solver", "oracle", "--W", 1) == main.EXIT_INFEASIBLE
    assert _run("oracle", STAR, "-I", 2, "-J", 1, "--W", 1) == main.EXIT_INFEASIBLE


@pytest.mark.parametrize("argv", [
    ["solve", STAR, "--W", "0.5", "--auto-w"],
    ["solve"],
    ["solve", STAR, "--solver", "cplex"],
    ["pof", "unknown"],
])
def test_usage_errors_exit_with_input_code(argv):
    with pytest.raises(SystemExit) as err:
        main.main(argv)
    assert err.value.code == main.EXIT_INPUT


def test_option_validation_errors():
    assert _run("solve", STAR, "--solver", "greedy", "--W", 0.5) == main.EXIT_INPUT
    assert _run("solve", STAR, "--W", 1.5) == main.EXIT_INPUT
    assert _run("solve", STAR, "-I", 0) == main.EXIT_INPUT
    assert _run("evaluate", STAR, "--x", "0,9") == main.EXIT_INPUT


def test_cap_exceeded_is_a_limit(monkeypatch):
    monkeypatch.setattr("solvers.exact_oracle.ORACLE_CAP", 1)
    assert _run("oracle", PATH, "-I", 2) == main.EXIT_LIMIT


def test_oracle_command(tmp_path):
    out = tmp_path / "o.json"
    assert _run("oracle", PATH, "-I", 2, "-J", 1, "-o", out) == 0
    result = json.loads(out.read_text())
    assert result["tau"] == 2
    assert result["x"] == [0, 1, 1, 0]
    assert _run("oracle", STAR, "-I", 2, "-J", 1, "--K", 2, "-o", out) == 0
    assert json.loads(out.read_text())["solver"] == "oracle-K2"


def test_evaluate_writes_group_csv(tmp_path):
    table = tmp_path / "groups.csv"
    assert _run("evaluate", PATH, "--x", "1,2", "-J", 1, "--csv", table, "-o", tmp_path / "e.json") == 0
    frame = pd.read_csv(table, dtype={"minimizing_scenario": str})
    assert frame["worst_case_covered"].tolist() == [1, 1]
    assert frame["worst_case_percent"].tolist() == [50.0, 50.0]
    assert frame["minimizing_scenario"].tolist() == ["1011", "1011"]


def test_polyhedral_uncertainty_file(tmp_path):
    out = tmp_path / "e.json"
    assert _run("evaluate", STAR, "--x", "0,1", "--uncertainty", FIXTURES / "two_groups_polyhedral.json",
                "-o", out) == 0
    assert json.loads(out.read_text())["worst_case_total"] == 1


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        assert _run("generate", "sbm", "--sizes", "5,7", "--seed", 3, "-o", target) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(json.loads(a.read_text())["nodes"]) == 12
    assert _run("generate", "gap", "--N", 4) == main.EXIT_INPUT


def test_compare_tables(tmp_path):
    out = tmp_path / "c.csv"
    assert _run("compare", PATH, "-I", 2, "-J", 1, "--solvers", "oracle,greedy,dc", "-o", out) == 0
    frame = pd.read_csv(out)
    assert frame["method"].tolist() == ["oracle", "greedy", "dc"]
    assert {"improvement_vs_greedy", "improvement_vs_dc", "pof_percent", "reference"} <= set(frame.columns)
    assert frame["reference"].eq("exact").all()
    assert frame.loc[0, "W_star"] == 0.48

    assert _run("compare", PATH, "-I", 2, "--solvers", "oracle,dc", "--table", "discrimination",
                "-o", out) == 0
    assert list(pd.read_csv(out).columns) == ["method", "N", "total_percent", "group_0_percent", "group_1_percent"]
    assert _run("compare", PATH, "--solvers", "oracle,magic") == main.EXIT_INPUT


def test_pof_commands(tmp_path):
    curves = tmp_path / "curves.csv"
    assert _run("pof", "curves", "-o", curves) == 0
    grid = np.unique(np.geomspace(20, 10_000, 50).round())
    assert len(pd.read_csv(curves)) == 3 * grid.size

    gap = tmp_path / "gap.csv"
    assert _run("pof", "gap", "--N", 9, 11, "-o", gap) == 0
    frame = pd.read_csv(gap)
    assert frame["pof"].round(6).tolist() == [round(1 / 3, 6), 0.5]
    assert (frame["pof"] - frame["closed_form"]).abs().max() < 1e-6

    assert _run("pof", "curves", "--small", 10) == main.EXIT_INPUT
