from __future__ import annotations

import numpy as np
import pytest

from tests.conftest import FIXTURES, random_instance
from tools.errors import CapExceededError, InputError
from tools.netmodel import GroupPartition, load_graph
from tools.uncertainty import (
    UncertaintySet,
    all_labels,
    cell_empty_integer,
    cell_empty_relaxed,
    contains,
    effective_scenarios,
    enumerate_scenarios,
    group_budget,
    is_positive,
    label_of,
    load_polyhedral,
    scenario_count,
)

STAR_SCHEMES = [(0, 1, 1, 1), (1, 0, 0, 0)]


def test_budget_enumeration_order():
    u = UncertaintySet.budget(4, 1)
    assert scenario_count(u) == 5
    assert list(enumerate_scenarios(u)) == [
        (1, 1, 1, 1), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0),
    ]


def test_budget_larger_than_node_count():
    u = UncertaintySet.budget(2, 5)
    assert len(list(enumerate_scenarios(u))) == 4
    assert u.max_failures() == 2


def test_enumeration_cap():
    with pytest.raises(CapExceededError) as err:
        enumerate_scenarios(UncertaintySet.budget(20, 10), cap=100)
    assert err.value.count > 100 and err.value.cap == 100


def test_effective_scenarios_fail_only_support():
    u = UncertaintySet.budget(4, 1)
    assert list(effective_scenarios(u, [3, 1])) == [(1, 1, 1, 1), (1, 0, 1, 1), (1, 1, 1, 0)]


def test_group_budget_keeps_someone_in_every_group():
    u = group_budget(GroupPartition((0, 0, 1, 1)), 1)
    members = list(enumerate_scenarios(u))
    assert len(members) == 9
    assert all(xi[0] + xi[1] >= 1 and xi[2] + xi[3] >= 1 for xi in members)
    assert not contains(u, (0, 0, 1, 1))


def test_polyhedral_file_and_validation(tmp_path):
    u = load_polyhedral(FIXTURES / "two_groups_polyhedral.json", 4)
    assert len(list(enumerate_scenarios(u))) == 9
    with pytest.raises(InputError, match="columns"):
        load_polyhedral(FIXTURES / "two_groups_polyhedral.json", 5)
    with pytest.raises(InputError, match="negative"):
        UncertaintySet.polyhedral([[1, -1]], [0])
    bad = tmp_path / "u.json"
    bad.write_text('{"A": [[1, 1]], "b": [1, 2]}')
    with pytest.raises(InputError):
        load_polyhedral(bad, 2)


def test_budget_as_polyhedral_row():
    a, b = UncertaintySet.budget(3, 1).as_polyhedral()
    assert a.tolist() == [[1.0, 1.0, 1.0]]
    assert b.tolist() == [2.0]


def test_labels_on_star():
    g, _ = load_graph(FIXTURES / "star.json")
    u = UncertaintySet.budget(4, 1)
    x = (1, 1, 0, 0)
    assert label_of(u, g, x, STAR_SCHEMES, (1, 1, 1, 1)) == (0, 0)
    assert label_of(u, g, x, STAR_SCHEMES, (0, 1, 1, 1)) == (2, 0)
    assert label_of(u, g, x, STAR_SCHEMES, (1, 0, 1, 1)) == (0, 1)
    with pytest.raises(InputError):
        label_of(u, g, x, STAR_SCHEMES, (0, 0, 1, 1))


def test_label_helpers():
    assert len(list(all_labels(3, 2))) == 16
    assert is_positive((1, 2))
    assert not is_positive((0, 2))


@pytest.mark.parametrize("label,empty", [((2, 1), True), ((0, 0), False), ((2, 0), False), ((1, 1), True)])
def test_star_cells(label, empty):
    g, _ = load_graph(FIXTURES / "star.json")
    u = UncertaintySet.budget(4, 1)
    x = (1, 1, 0, 0)
    assert cell_empty_integer(u, g, x, STAR_SCHEMES, label) is empty
    assert cell_empty_relaxed(u, g, x, STAR_SCHEMES, label) is empty


def test_label_validation():
    g, _ = load_graph(FIXTURES / "star.json")
    u = UncertaintySet.budget(4, 1)
    with pytest.raises(InputError):
        cell_empty_integer(u, g, (1, 1, 0, 0), STAR_SCHEMES, (5, 0))
    with pytest.raises(InputError):
        cell_empty_relaxed(u, g, (1, 1, 0, 0), STAR_SCHEMES, (0,))


def _random_cell_case(rng):
    n = int(rng.integers(3, 7))
    inst = random_instance(rng, n, monitors=int(rng.integers(1, 4)), fail_budget=int(rng.integers(0, 3)))
    k = int(rng.integers(1, 3))
    x = np.zeros(n, dtype=int)
    x[rng.choice(n, size=min(inst.budget, n), replace=False)] = 1
    schemes = [tuple(int(v) for v in rng.integers(0, 2, size=n)) for _ in range(k)]
    label = tuple(int(v) for v in rng.integers(0, n + 1, size=k))
    return inst, tuple(int(v) for v in x), schemes, label


def _agree(seed):
    rng = np.random.default_rng(seed)
    inst, x, schemes, label = _random_cell_case(rng)
    u, g = inst.uncertainty, inst.graph
    return cell_empty_integer(u, g, x, schemes, label) == cell_empty_relaxed(u, g, x, schemes, label)


@pytest.mark.parametrize("seed", range(40))
def test_integer_and_relaxed_cells_agree(seed):
    assert _agree(seed)


@pytest.mark.slow
def test_integer_and_relaxed_cells_agree_batch():
    disagreements = [seed for seed in range(1000, 1200) if not _agree(seed)]
    assert disagreements == []
