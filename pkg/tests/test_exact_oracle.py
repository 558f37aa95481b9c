from __future__ import annotations

import numpy as np
import pytest

from solvers.baselines import evaluate_worst_case
from solvers.exact_oracle import (
    solve_kadapt_bruteforce,
    solve_rc,
    solve_rc_fair,
    solve_two_stage,
)
from tests.conftest import fixture_instance, random_instance
from tools.errors import CapExceededError


@pytest.mark.parametrize("fail_budget,optimum", [(0, 4), (1, 2)])
def test_path_optimum(fail_budget, optimum):
    inst = fixture_instance("path", monitors=2, fail_budget=fail_budget)
    result = solve_rc(inst)
    assert result.optimum == optimum
    assert result.x.nodes == (1, 2)
    assert result.subsets_scanned == 6


def test_star_robust_optimum(star):
    result = solve_rc(star)
    assert result.optimum == 1
    assert result.x.nodes == (0, 1)
    assert result.recourse[(1, 1, 1, 1)] == 4


def test_fair_oracle_on_two_cliques(two_cliques):
    assert solve_rc_fair(two_cliques, w=0.48).x.nodes == (0, 2)
    assert solve_rc_fair(two_cliques, w=0.48).optimum == 2
    assert not solve_rc_fair(two_cliques, w=0.52).feasible


def test_floors_rule_out_monitor_sets(star):
    assert solve_rc_fair(star, w=0.0).optimum == 1
    assert not solve_rc_fair(star, w=0.5).feasible


def test_oracle_optimum_is_attained(path4):
    result = solve_rc(path4)
    report = evaluate_worst_case(path4.graph, path4.partition, result.x, path4.uncertainty)
    assert report.worst_total == result.optimum


def test_cap_is_checked_before_scanning(path4):
    with pytest.raises(CapExceededError):
        solve_rc(path4, cap=1)
    with pytest.raises(CapExceededError):
        solve_kadapt_bruteforce(path4, 2, cap=10)


@pytest.mark.parametrize("seed", range(12))
def test_two_stage_matches_fair_oracle(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(4, 7)), monitors=2, fail_budget=int(rng.integers(0, 2)))
    w = float(rng.choice([0.0, 0.2, 0.4]))
    assert solve_two_stage(inst, w=w).optimum == solve_rc_fair(inst, w=w).optimum


@pytest.mark.parametrize("seed", range(8))
def test_exhaustive_scan_agrees(seed):
    rng = np.random.default_rng(100 + seed)
    inst = random_instance(rng, 5, monitors=2, fail_budget=1)
    exhaustive = solve_rc(inst, exhaustive=True)
    assert exhaustive.optimum == solve_rc(inst).optimum
    assert exhaustive.subsets_scanned == 16


@pytest.mark.parametrize("name,k,value", [("star", 1, 1), ("star", 2, 1), ("path", 1, 1), ("path", 2, 2)])
def test_kadapt_bruteforce(name, k, value):
    inst = fixture_instance(name, monitors=2, fail_budget=1)
    result = solve_kadapt_bruteforce(inst, k)
    assert result.optimum == value
    assert len(result.schemes) == k


@pytest.mark.parametrize("seed", range(5))
def test_kadapt_bruteforce_grows_with_k(seed):
    rng = np.random.default_rng(200 + seed)
    inst = random_instance(rng, 4, monitors=2, fail_budget=1)
    values = [solve_kadapt_bruteforce(inst, k).optimum for k in (1, 2, 3)]
    assert values == sorted(values)
    assert values[-1] <= solve_two_stage(inst).optimum
