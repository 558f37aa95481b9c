"""Shared builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from tools.instance import CoveringInstance
from tools.netmodel import Graph, GroupPartition, load_graph
from tools.uncertainty import UncertaintySet

FIXTURES = Path(__file__).resolve().parent.parent / "data" / "fixtures"


def make_instance(n: int, edges, groups=None, monitors: int = 1, fail_budget: int = 0,
                  symmetric: bool = True, w: float = 0.0) -> CoveringInstance:
    graph = Graph.from_edges(n, edges, symmetric=symmetric)
    partition = GroupPartition(tuple(groups) if groups is not None else (0,) * n)
    inst = CoveringInstance(graph, partition, UncertaintySet.budget(n, fail_budget), monitors)
    return inst.with_fairness(w) if w else inst


def fixture_instance(name: str, monitors: int, fail_budget: int = 0) -> CoveringInstance:
    graph, partition = load_graph(FIXTURES / f"{name}.json")
    return CoveringInstance(graph, partition, UncertaintySet.budget(graph.node_count, fail_budget), monitors)


def random_instance(rng: np.random.Generator, n: int, monitors: int, fail_budget: int,
                    groups: int = 2, density: float = 0.4) -> CoveringInstance:
    """Random symmetric graph with every group nonempty."""
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < density]
    labels = list(range(groups)) + list(rng.integers(0, groups, size=n - groups))
    rng.shuffle(labels)
    return make_instance(n, edges, [int(c) for c in labels], monitors, fail_budget)


@pytest.fixture
def star():
    return fixture_instance("star", monitors=2, fail_budget=1)


@pytest.fixture
def path4():
    return fixture_instance("path", monitors=2, fail_budget=0)


@pytest.fixture
def two_cliques():
    return fixture_instance("two_cliques", monitors=2, fail_budget=0)
