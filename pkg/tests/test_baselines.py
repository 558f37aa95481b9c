from __future__ import annotations

import numpy as np
import pytest

from solvers.baselines import (
    degree_centrality,
    evaluate_worst_case,
    greedy_robust,
    kadapt_value,
    scheme_from_coverage,
)
from solvers.exact_oracle import solve_rc
from tests.conftest import fixture_instance, random_instance
from tools.errors import InputError
from tools.uncertainty import UncertaintySet

STAR_SCHEMES = [(0, 1, 1, 1), (1, 0, 0, 0)]


def test_worst_case_on_star(star):
    report = evaluate_worst_case(star.graph, star.partition, (1, 1, 0, 0), star.uncertainty)
    assert report.worst_total == 1
    assert report.worst_total_scenario == (0, 1, 1, 1)
    assert report.worst_by_group == (1, 0)
    assert report.scenario_by_group == ((0, 1, 1, 1), (0, 1, 1, 1))
    assert report.scenarios_scanned == 3
    assert report.total_percent == 25.0
    assert report.group_percents == (50.0, 0.0)
    assert report.worst_group_fraction == 0.0
    assert report.meets_floors((1, 0))
    assert not report.meets_floors((1, 1))


def test_worst_case_frame(path4):
    report = evaluate_worst_case(path4.graph, path4.partition, (0, 1, 1, 0), path4.uncertainty)
    frame = report.to_frame()
    assert list(frame.columns) == ["group", "size", "worst_case_covered", "worst_case_percent",
                                   "minimizing_scenario"]
    assert frame["worst_case_covered"].tolist() == [2, 2]
    assert frame["minimizing_scenario"].tolist() == ["1111", "1111"]


def test_group_minimisers_are_independent():
    inst = fixture_instance("path", monitors=2, fail_budget=1)
    report = evaluate_worst_case(inst.graph, inst.partition, (0, 1, 1, 0), inst.uncertainty)
    assert report.worst_total == 2
    assert report.worst_by_group == (1, 1)
    assert report.scenario_by_group == ((1, 0, 1, 1), (1, 0, 1, 1))


def test_empty_uncertainty_set_is_an_input_error(path4):
    empty = UncertaintySet.polyhedral([[1, 1, 1, 1]], [5])
    with pytest.raises(InputError):
        evaluate_worst_case(path4.graph, path4.partition, (0, 1, 1, 0), empty)


def test_kadapt_value_on_star(star):
    assert kadapt_value(star, (1, 1, 0, 0), STAR_SCHEMES) == 1
    assert kadapt_value(star, (1, 1, 0, 0), STAR_SCHEMES[:1]) is None
    with pytest.raises(InputError, match="floors"):
        kadapt_value(star.with_fairness(1.0), (1, 1, 0, 0), STAR_SCHEMES)


def test_scheme_from_coverage(star):
    scheme = scheme_from_coverage(star.graph, (1, 1, 0, 0), (1, 1, 1, 1), star.floors)
    assert scheme.y == (1, 1, 1, 1)
    assert scheme.covered == 4
    assert scheme.meets_floors(star.partition)


def test_greedy_and_degree_on_star(star):
    assert greedy_robust(star).nodes == (0, 1)
    assert degree_centrality(star).nodes == (0, 1)


def test_greedy_on_path(path4):
    x = greedy_robust(path4)
    assert x.nodes == (1, 2)
    assert evaluate_worst_case(path4.graph, path4.partition, x, path4.uncertainty).worst_total == 4


def test_budget_above_node_count_places_every_node():
    inst = fixture_instance("two_cliques", monitors=9)
    assert greedy_robust(inst).nodes == (0, 1, 2, 3)
    assert degree_centrality(inst).budget == 9


@pytest.mark.parametrize("seed", range(10))
def test_greedy_never_beats_the_oracle(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 6, monitors=2, fail_budget=1)
    greedy = greedy_robust(inst)
    value = evaluate_worst_case(inst.graph, inst.partition, greedy, inst.uncertainty).worst_total
    assert value <= solve_rc(inst).optimum
