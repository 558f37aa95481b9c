"""
solvers/exact_oracle.py
=======================
Brute-force ground truth for tiny instances.

Monitor sets are enumerated with exactly ``min(I, N)`` members (adding a
monitor never lowers any coverage); ``exhaustive=True`` scans every set of
size ``<= I`` instead.  Scenarios are the effective ones (failures among
the monitors only).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from config.settings import ORACLE_CAP
from solvers.baselines import kadapt_value
from tools.errors import CapExceededError
from tools.instance import CoveringInstance
from tools.netmodel import CoveringScheme, MonitorSet, Scenario, cover_counts
from tools.uncertainty import effective_scenarios, scenario_count

logger = logging.getLogger(__name__)


@dataclass
class OracleResult:
    optimum: Optional[int]
    x: Optional[MonitorSet]
    recourse: dict[Scenario, Optional[int]] = field(default_factory=dict)
    subsets_scanned: int = 0
    scenarios_scanned: int = 0
    schemes: list[CoveringScheme] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.optimum is not None


def _monitor_sets(instance: CoveringInstance, exhaustive: bool) -> Iterator[tuple[int, ...]]:
    n = instance.node_count
    sizes = range(instance.effective_budget + 1) if exhaustive else [instance.effective_budget]
    for size in sizes:
        yield from itertools.combinations(range(n), size)


def _check_cap(instance: CoveringInstance, exhaustive: bool, cap: int | None, extra: int = 1) -> None:
    cap = ORACLE_CAP if cap is None else cap
    n, i = instance.node_count, instance.effective_budget
    subsets = sum(math.comb(n, s) for s in range(i + 1)) if exhaustive else math.comb(n, i)
    count = subsets * scenario_count(instance.uncertainty, i) * extra
    if count > cap:
        raise CapExceededError(f"oracle enumeration (N={n}, I={instance.budget})", count, cap)


def _maximin(instance: CoveringInstance, value_of: Callable[[np.ndarray, Scenario], Optional[int]],
             exhaustive: bool, cap: int | None, tag: str) -> OracleResult:
    """``max_x min_xi value_of(x, xi)``; a ``None`` value rules ``x`` out."""
    _check_cap(instance, exhaustive, cap)
    n = instance.node_count
    best = OracleResult(None, None)
    subsets = scenarios = 0
    for chosen in _monitor_sets(instance, exhaustive):
        subsets += 1
        xv = np.zeros(n, dtype=np.int64)
        xv[list(chosen)] = 1
        table: dict[Scenario, Optional[int]] = {}
        worst: Optional[int] = None
        ruled_out = False
        for xi in effective_scenarios(instance.uncertainty, chosen):
            scenarios += 1
            value = value_of(xv, xi)
            table[xi] = value
            if value is None:
                ruled_out = True
                break
            if worst is None or value < worst:
                worst = value
        if ruled_out or worst is None:
            continue
        if best.optimum is None or worst > best.optimum:
            best = OracleResult(worst, MonitorSet(tuple(int(v) for v in xv), instance.budget), table)
    best.subsets_scanned, best.scenarios_scanned = subsets, scenarios
    logger.info("[Oracle] %s: optimum=%s after %d monitor sets / %d scenarios",
                tag, best.optimum, subsets, scenarios)
    return best


def solve_rc(instance: CoveringInstance, exhaustive: bool = False, cap: int | None = None) -> OracleResult:
    """``max_{x in X} min_{xi in Xi} F_G(x, xi)`` (fairness floors ignored)."""
    g = instance.graph

    def total(xv: np.ndarray, xi: Scenario) -> int:
        return int(np.count_nonzero(cover_counts(g, xv, xi)))

    return _maximin(instance, total, exhaustive, cap, "RC")


def solve_rc_fair(instance: CoveringInstance, w: float | None = None, exhaustive: bool = False,
                  cap: int | None = None) -> OracleResult:
    """As :func:`solve_rc` but every group must keep ``F_{G,c} >= floor_c`` under every scenario."""
    inst = instance if w is None else instance.with_fairness(w)
    g, groups = inst.graph, np.asarray(inst.partition.group_of)
    floors = np.asarray(inst.floors)

    def fair_total(xv: np.ndarray, xi: Scenario) -> Optional[int]:
        covered = (cover_counts(g, xv, xi) >= 1).astype(int)
        per_group = np.bincount(groups, weights=covered, minlength=floors.size)
        if np.any(per_group < floors):
            return None
        return int(covered.sum())

    return _maximin(inst, fair_total, exhaustive, cap, f"RC_fair(W={inst.w:g})")


def solve_two_stage(instance: CoveringInstance, w: float | None = None, exhaustive: bool = False,
                    cap: int | None = None) -> OracleResult:
    """``max_x min_xi max { e'y : y in Y, y <= y(x, xi) }`` solved group by group.

    Within a group the best admissible scheme counts every covered node,
    and it exists only when that count reaches the group's floor.
    """
    inst = instance if w is None else instance.with_fairness(w)
    g, p = inst.graph, inst.partition
    members = [np.asarray(p.members(c)) for c in range(p.group_count)]

    def recourse(xv: np.ndarray, xi: Scenario) -> Optional[int]:
        covered = cover_counts(g, xv, xi) >= 1
        best = 0
        for c, nodes in enumerate(members):
            coverable = int(covered[nodes].sum())
            if coverable < inst.floors[c]:
                return None
            best += coverable
        return best

    return _maximin(inst, recourse, exhaustive, cap, f"two-stage(W={inst.w:g})")


def _candidate_schemes(instance: CoveringInstance, xv: np.ndarray) -> list[tuple[int, ...]]:
    """Schemes in Y that are feasible for at least the all-available scenario."""
    coverable = np.flatnonzero(cover_counts(instance.graph, xv, np.ones(instance.node_count, dtype=np.int64)))
    groups = np.asarray(instance.partition.group_of)
    floors = np.asarray(instance.floors)
    schemes = []
    for mask in itertools.product((0, 1), repeat=coverable.size):
        y = np.zeros(instance.node_count, dtype=np.int64)
        y[coverable] = mask
        if np.all(np.bincount(groups, weights=y, minlength=floors.size) >= floors):
            schemes.append(tuple(int(v) for v in y))
    return schemes


def solve_kadapt_bruteforce(instance: CoveringInstance, k: int, cap: int | None = None) -> OracleResult:
    """Exact K-adaptability optimum: every ``x`` and every K-multiset of schemes."""
    cap = ORACLE_CAP if cap is None else cap
    n = instance.node_count
    per_x = math.comb(2 ** n + k - 1, k)
    _check_cap(instance, False, cap, extra=per_x)
    best = OracleResult(None, None)
    subsets = 0
    for chosen in _monitor_sets(instance, False):
        subsets += 1
        xv = np.zeros(n, dtype=np.int64)
        xv[list(chosen)] = 1
        for combo in itertools.combinations_with_replacement(_candidate_schemes(instance, xv), k):
            value = kadapt_value(instance, xv, combo)
            if value is not None and (best.optimum is None or value > best.optimum):
                best = OracleResult(value, MonitorSet(tuple(int(v) for v in xv), instance.budget),
                                    schemes=[CoveringScheme(y, instance.floors) for y in combo])
    best.subsets_scanned = subsets
    logger.info("[Oracle] K=%d adaptability: optimum=%s", k, best.optimum)
    return best
