"""
evaluation/metrics.py
=====================
Comparison metrics for monitor choices on one instance.

* discrimination table – worst-case percentage covered, overall and per
  group, one row per method;
* comparison table     – for every method the worst-off group's worst-case
  percentage, its improvement over each baseline, and the PoF relative to
  a reference unconstrained coverage.

The reference is the exact robust optimum when the oracle fits within its
cap; otherwise the robust greedy heuristic's worst-case coverage is used
and the ``reference`` column says so.

Usage:
    from evaluation.metrics import compare_methods

    frame = compare_methods(instance, ["benders", "greedy", "dc"], k=2)
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import pandas as pd

from solvers.baselines import EvaluationReport, degree_centrality, evaluate_worst_case, greedy_robust
from solvers.exact_oracle import solve_rc
from solvers.fairness_search import FairnessConfig, max_feasible_w
from tools.errors import CapExceededError, InputError
from tools.instance import CoveringInstance
from tools.netmodel import MonitorSet

logger = logging.getLogger(__name__)

FAIR_METHODS = ("benders", "monolithic", "oracle")
BASELINE_METHODS = ("greedy", "dc")


@dataclass
class MethodOutcome:
    method: str
    x: MonitorSet
    report: EvaluationReport
    seconds: float
    w_star: Optional[float] = None
    tau: Optional[int] = None


# ────────────────────────────────────────────────────────────────────
# Running the methods
# ────────────────────────────────────────────────────────────────────

def run_method(instance: CoveringInstance, method: str, k: int = 1,
               cfg: FairnessConfig | None = None) -> MethodOutcome:
    """Choose monitors with ``method`` and evaluate them exactly."""
    t0 = time.perf_counter()
    w_star = tau = None
    if method in FAIR_METHODS:
        base = cfg or FairnessConfig()
        res = max_feasible_w(instance, base.model_copy(update={"solver": method, "k": k}))
        x, w_star, tau = res.best.x, res.w_star, res.tau
    elif method == "greedy":
        x = greedy_robust(instance)
    elif method == "dc":
        x = degree_centrality(instance)
    else:
        raise InputError(f"unknown method {method!r}; expected one of {FAIR_METHODS + BASELINE_METHODS}")
    report = evaluate_worst_case(instance.graph, instance.partition, x, instance.uncertainty)
    seconds = time.perf_counter() - t0
    logger.info("[Compare] %s: worst total %d, worst group %.1f%% (%.2fs)",
                method, report.worst_total, 100 * report.worst_group_fraction, seconds)
    return MethodOutcome(method, x, report, seconds, w_star, tau)


def reference_coverage(instance: CoveringInstance,
                       outcomes: dict[str, MethodOutcome] | None = None) -> tuple[int, str]:
    """Unconstrained worst-case coverage used as the PoF denominator."""
    try:
        res = solve_rc(instance.unconstrained())
        return int(res.optimum), "exact"
    except CapExceededError as exc:
        logger.warning("[Compare] exact reference out of cap (%s); using greedy", exc)
    greedy = (outcomes or {}).get("greedy") or run_method(instance, "greedy")
    return greedy.report.worst_total, "greedy"


# ────────────────────────────────────────────────────────────────────
# Tables
# ────────────────────────────────────────────────────────────────────

def discrimination_table(outcomes: Sequence[MethodOutcome]) -> pd.DataFrame:
    """Worst-case percentage covered overall and per group."""
    rows = []
    for o in outcomes:
        row: dict[str, Any] = {"method": o.method, "N": o.report.node_count,
                               "total_percent": o.report.total_percent}
        for c, pct in enumerate(o.report.group_percents):
            row[f"group_{c}_percent"] = pct
        rows.append(row)
    return pd.DataFrame(rows)


def comparison_table(outcomes: Sequence[MethodOutcome], reference: int,
                     reference_kind: str = "exact") -> pd.DataFrame:
    """Improvement in the worst-off group's percentage and PoF, in percent."""
    baselines = {o.method: o for o in outcomes if o.method in BASELINE_METHODS}
    rows = []
    for o in outcomes:
        min_pct = round(100.0 * o.report.worst_group_fraction, 1)
        row: dict[str, Any] = {
            "method": o.method,
            "worst_total": o.report.worst_total,
            "total_percent": o.report.total_percent,
            "min_group_percent": min_pct,
            "W_star": o.w_star,
            "pof_percent": round(100.0 * (1.0 - o.report.worst_total / reference), 1) if reference else None,
            "reference": reference_kind,
            "reference_coverage": reference,
            "seconds": round(o.seconds, 3),
        }
        for name, base in baselines.items():
            row[f"improvement_vs_{name}"] = round(min_pct - 100.0 * base.report.worst_group_fraction, 1)
        rows.append(row)
    return pd.DataFrame(rows)


def compare_methods(instance: CoveringInstance, methods: Sequence[str], k: int = 1,
                    cfg: FairnessConfig | None = None, table: str = "comparison") -> pd.DataFrame:
    """Run every method, then build the comparison (or discrimination) table."""
    if table not in ("comparison", "discrimination"):
        raise InputError(f"unknown table {table!r}; expected 'comparison' or 'discrimination'")
    outcomes = {m: run_method(instance, m, k, cfg) for m in methods}
    if table == "discrimination":
        return discrimination_table(list(outcomes.values()))
    reference, kind = reference_coverage(instance, outcomes)
    return comparison_table(list(outcomes.values()), reference, kind)


def print_table(frame: pd.DataFrame, title: str) -> None:
    print("\n" + "=" * 70)
    print(f" {title}")
    print("=" * 70)
    print(frame.to_string(index=False))
