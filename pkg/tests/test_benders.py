from __future__ import annotations

import json

import numpy as np
import pytest

from graph.nodes import Certified, Violation, separate
from graph.workflow import build_benders_graph, run_benders
from solvers.baselines import kadapt_value
from solvers.exact_oracle import solve_kadapt_bruteforce
from solvers.kadapt_model import solve_full
from tests.conftest import fixture_instance, random_instance
from tools.solver_kernel import SolveStatus

STAR_SCHEMES = [(0, 1, 1, 1), (1, 0, 0, 0)]


def test_separation_returns_the_weakest_scenario(star):
    cut = separate(star, (1, 1, 0, 0), STAR_SCHEMES, 2)
    assert cut == Violation((0, 1, 1, 1), (2, 0), 1)
    assert separate(star, (1, 1, 0, 0), STAR_SCHEMES, 1) == Certified(1)


def test_separation_returns_positive_labels_first(star):
    cut = separate(star, (1, 1, 0, 0), STAR_SCHEMES[:1], 0)
    assert cut.value is None
    assert cut.label == (2,)


def test_graph_has_every_step():
    nodes = set(build_benders_graph().get_graph().nodes)
    assert {"init_master", "solve_master", "separate", "add_block", "audit", "rebuild_master"} <= nodes


@pytest.mark.parametrize("k", [1, 2])
def test_star(star, k):
    result = run_benders(star, k)
    assert result.status == "optimal"
    assert result.tau == 1
    assert result.bound == 1.0
    assert len(set(result.labels)) == len(result.labels)
    assert result.incumbent.tau == 1


def test_trace_has_one_line_per_iteration(star, tmp_path):
    trace = tmp_path / "trace.jsonl"
    result = run_benders(star, 2, trace_path=trace)
    lines = [json.loads(line) for line in trace.read_text().splitlines()]
    assert len(lines) == len(result.iterations)
    assert [line["iteration"] for line in lines] == list(range(len(lines)))
    assert lines[-1]["label"] is None
    assert all({"objective", "blocks", "big_m", "seconds"} <= set(line) for line in lines)
    assert [line["blocks"] for line in lines] == list(range(len(lines)))


def test_iteration_limit(star):
    result = run_benders(star, 1, max_iterations=1)
    assert result.status == "iteration_limit"
    assert result.solution is None
    assert result.bound == 4.0
    assert len(result.labels) == 1


def test_time_limit(star):
    result = run_benders(star, 1, time_limit=0.0)
    assert result.status == "time_limit"
    assert result.tau is None


def test_infeasible_floors(star):
    assert run_benders(star.with_fairness(0.5), 1).status == "infeasible"


def test_path_two_schemes_matches_monolithic():
    inst = fixture_instance("path", monitors=2, fail_budget=1)
    result = run_benders(inst, 2)
    assert result.tau == solve_full(inst, 2).solution.tau == 2


@pytest.mark.parametrize("seed", range(6))
def test_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(4, 6)), monitors=2, fail_budget=1)
    assert run_benders(inst, 1).tau == solve_kadapt_bruteforce(inst, 1).optimum


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_matches_monolithic(seed):
    n, k = 3 + seed % 4, 1 + (seed // 4) % 2
    rng = np.random.default_rng(300 + seed)
    inst = random_instance(rng, n, monitors=int(rng.integers(1, 4)), fail_budget=int(rng.integers(0, 2)))
    inst = inst.with_fairness(float(rng.choice([0.0, 0.2])))
    benders = run_benders(inst, k)
    mono = solve_full(inst, k)
    assert mono.status in (SolveStatus.OPTIMAL, SolveStatus.INFEASIBLE)
    if mono.solution is None:
        assert benders.status == mono.status.value
    else:
        assert benders.tau == mono.solution.tau
        assert len(benders.labels) <= (n + 1) ** k
        assert kadapt_value(inst, benders.solution.x, [s.y for s in benders.solution.schemes]) == benders.tau
