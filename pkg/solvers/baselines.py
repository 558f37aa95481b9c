"""
solvers/baselines.py
====================
Exact worst-case evaluation of a given monitor set, the exact value of a
K-adaptability first-stage decision, and the two comparison heuristics
(robust greedy, degree centrality).

Only failures among the selected monitors change coverage, so every scan
here runs over ``effective_scenarios`` with the monitors as support.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from tools.errors import InputError
from tools.instance import CoveringInstance
from tools.netmodel import (
    CoveringScheme,
    Graph,
    GroupPartition,
    MonitorSet,
    Scenario,
    as_binary_vector,
    cover_counts,
)
from tools.uncertainty import UncertaintySet, effective_scenarios

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvaluationReport:
    """Worst case of total and per-group coverage, each minimised on its own."""

    worst_total: int
    worst_total_scenario: Scenario
    worst_by_group: tuple[int, ...]
    scenario_by_group: tuple[Scenario, ...]
    group_sizes: tuple[int, ...]
    scenarios_scanned: int

    @property
    def node_count(self) -> int:
        return sum(self.group_sizes)

    @property
    def total_percent(self) -> float:
        return round(100.0 * self.worst_total / self.node_count, 1)

    @property
    def group_percents(self) -> tuple[float, ...]:
        return tuple(round(100.0 * c / s, 1) for c, s in zip(self.worst_by_group, self.group_sizes))

    @property
    def worst_group_fraction(self) -> float:
        """Coverage fraction of the worst-off group (the maximin objective)."""
        return min(c / s for c, s in zip(self.worst_by_group, self.group_sizes))

    def meets_floors(self, floors: Sequence[int]) -> bool:
        return all(c >= f for c, f in zip(self.worst_by_group, floors))

    def to_frame(self) -> pd.DataFrame:
        """One row per group: the per-group CSV body."""
        return pd.DataFrame({
            "group": range(len(self.group_sizes)),
            "size": self.group_sizes,
            "worst_case_covered": self.worst_by_group,
            "worst_case_percent": self.group_percents,
            "minimizing_scenario": ["".join(map(str, s)) for s in self.scenario_by_group],
        })


def evaluate_worst_case(g: Graph, p: GroupPartition, x, u: UncertaintySet,
                        cap: int | None = None) -> EvaluationReport:
    """Exact ``min_xi F_G`` and ``min_xi F_{G,c}`` for every group ``c``.

    Ties keep the first minimiser in enumeration order.
    """
    xv = as_binary_vector(x, g.node_count, "monitor vector")
    groups = np.asarray(p.group_of)
    worst_total, total_xi = None, None
    worst_group = [None] * p.group_count
    group_xi: list[Optional[Scenario]] = [None] * p.group_count
    scanned = 0
    for xi in effective_scenarios(u, np.flatnonzero(xv), cap):
        scanned += 1
        covered = (cover_counts(g, xv, xi) >= 1).astype(int)
        total = int(covered.sum())
        if worst_total is None or total < worst_total:
            worst_total, total_xi = total, xi
        per_group = np.bincount(groups, weights=covered, minlength=p.group_count)
        for c, value in enumerate(per_group):
            if worst_group[c] is None or value < worst_group[c]:
                worst_group[c], group_xi[c] = int(value), xi
    if worst_total is None:
        raise InputError(f"{u.describe()} has no members")
    return EvaluationReport(worst_total, total_xi, tuple(worst_group), tuple(group_xi),
                            p.group_sizes, scanned)


def kadapt_value(instance: CoveringInstance, x, schemes: Sequence) -> Optional[int]:
    """``min_xi max { e'y^k : y^k feasible under xi }`` for fixed ``(x, y^1..y^K)``.

    ``None`` when some scenario leaves every scheme infeasible.
    """
    g = instance.graph
    xv = as_binary_vector(x, g.node_count, "monitor vector")
    ys = np.vstack([as_binary_vector(y, g.node_count, f"scheme {k + 1}") for k, y in enumerate(schemes)])
    groups = np.asarray(instance.partition.group_of)
    for k, y in enumerate(ys):
        counts = np.bincount(groups, weights=y, minlength=instance.partition.group_count)
        if np.any(counts < np.asarray(instance.floors)):
            raise InputError(f"scheme {k + 1} misses the group floors {instance.floors}")
    sizes = ys.sum(axis=1)
    worst: Optional[int] = None
    for xi in effective_scenarios(instance.uncertainty, np.flatnonzero(xv)):
        covered = cover_counts(g, xv, xi) >= 1
        feasible = np.all(ys <= covered[None, :], axis=1)
        if not feasible.any():
            return None
        value = int(sizes[feasible].max())
        if worst is None or value < worst:
            worst = value
    return worst


def greedy_robust(instance: CoveringInstance) -> MonitorSet:
    """Add, ``I`` times, the node that maximises the exact worst-case coverage.

    Ties go to the smallest node index.
    """
    g, p, u = instance.graph, instance.partition, instance.uncertainty
    chosen: list[int] = []
    for step in range(instance.effective_budget):
        best_node, best_value = -1, -1
        for node in range(g.node_count):
            if node in chosen:
                continue
            trial = MonitorSet.from_nodes(g.node_count, chosen + [node])
            value = evaluate_worst_case(g, p, trial, u).worst_total
            if value > best_value:
                best_node, best_value = node, value
        chosen.append(best_node)
        logger.debug("[Greedy] step %d: node %d, worst-case coverage %d", step + 1, best_node, best_value)
    return MonitorSet.from_nodes(g.node_count, chosen, budget=instance.budget)


def degree_centrality(instance: CoveringInstance) -> MonitorSet:
    """The ``I`` nodes with the largest out-degree, ties to the smallest index."""
    g = instance.graph
    order = sorted(range(g.node_count), key=lambda n: (-g.out_degree(n), n))
    return MonitorSet.from_nodes(g.node_count, order[:instance.effective_budget], budget=instance.budget)


def scheme_from_coverage(g: Graph, x, xi: Scenario, floors: Sequence[int] = ()) -> CoveringScheme:
    """The covering scheme ``y(x, xi)`` as a candidate scheme."""
    covered = tuple(int(c >= 1) for c in cover_counts(g, x, xi))
    return CoveringScheme(covered, tuple(floors))
