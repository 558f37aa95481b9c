"""
graph/nodes.py
==============
Steps of the delayed label-block generation loop.

Every node takes the ``BendersState`` and returns a partial update with a
``feedback`` token the routing functions in ``graph/workflow.py`` switch on:

    MASTER_SOLVED | MASTER_INFEASIBLE | MASTER_LIMIT
    VIOLATION | CERTIFIED
    BLOCK_ADDED | ITERATION_LIMIT
    AUDIT_PASSED | AUDIT_FAILED
    REBUILT
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from config.settings import BIG_M_MAX_DOUBLINGS
from data.checkpoints import BendersState
from solvers.baselines import kadapt_value
from solvers.kadapt_model import (
    KAdaptSolution,
    add_block,
    build_master,
    rebuild,
)
from tools.errors import BigMAuditError, SolverFailure
from tools.instance import CoveringInstance
from tools.netmodel import CoveringScheme, MonitorSet, Scenario, as_binary_vector, cover_counts
from tools.solver_kernel import SolveStatus, solve_milp
from tools.uncertainty import LabelVector, effective_scenarios, is_positive, label_from_counts

logger = logging.getLogger(__name__)


# ────────────────────────────────────────────────────────────────────
# Separation
# ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Violation:
    scenario: Scenario
    label: LabelVector
    value: Optional[int]          # None: no scheme is feasible (label in L+)


@dataclass(frozen=True)
class Certified:
    value: int                    # exact min over scenarios of the best feasible scheme size


def separate(instance: CoveringInstance, x, schemes: Sequence, tau: float) -> Violation | Certified:
    """Scan the effective scenarios of ``x`` for a cut.

    A scenario whose label lies in L+ is returned at once.  Otherwise the
    scenario minimising ``v(xi) = max { e'y^k : l_k = 0 }`` is returned when
    ``v(xi) < tau - 1/2``; ties keep the first in enumeration order.
    """
    g = instance.graph
    xv = as_binary_vector(x, g.node_count, "monitor vector")
    ys = np.vstack([as_binary_vector(y, g.node_count, f"scheme {k + 1}") for k, y in enumerate(schemes)])
    sizes = ys.sum(axis=1)
    best: Optional[Violation] = None
    for xi in effective_scenarios(instance.uncertainty, np.flatnonzero(xv)):
        label = label_from_counts(cover_counts(g, xv, xi), ys)
        if is_positive(label):
            return Violation(xi, label, None)
        value = int(max(sizes[k] for k, entry in enumerate(label) if entry == 0))
        if best is None or value < best.value:
            best = Violation(xi, label, value)
    if best is None:
        raise SolverFailure(f"{instance.uncertainty.describe()} has no members")
    if best.value < tau - 0.5:
        return best
    return Certified(best.value)


def _write_trace(path: Optional[str], record: dict) -> None:
    if not path:
        return
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _remaining(state: BendersState) -> float:
    return state["time_limit"] - (time.perf_counter() - state["started"])


# ────────────────────────────────────────────────────────────────────
# Nodes
# ────────────────────────────────────────────────────────────────────

def init_master_node(state: BendersState):
    model = build_master(state["instance"], state["k"], state.get("big_m"), state.get("symmetry", True))
    return {
        "model": model,
        "big_m": model.big_m,
        "doublings": state.get("doublings", 0),
        "iteration": 0,
        "messages": [f"Master: K={model.k}, N={model.instance.node_count}, M={model.big_m:g}, no blocks."],
        "feedback": "REBUILT",
    }


def solve_master_node(state: BendersState):
    model = state["model"]
    remaining = _remaining(state)
    if remaining <= 0:
        return {"feedback": "MASTER_LIMIT", "status": SolveStatus.TIME_LIMIT.value,
                "messages": ["Master: time budget exhausted before solve."]}
    report = solve_milp(model.milp, time_limit=remaining)
    if report.status is SolveStatus.INFEASIBLE:
        return {"report": report, "feedback": "MASTER_INFEASIBLE", "status": SolveStatus.INFEASIBLE.value,
                "messages": [f"Master: infeasible with {len(model.blocks)} blocks."]}
    if not report.optimal:
        return {"report": report, "feedback": "MASTER_LIMIT", "status": report.status.value,
                "messages": [f"Master: stopped with status {report.status.value}."]}
    x = tuple(int(round(report.x[c])) for c in model.x)
    schemes = [tuple(int(round(report.x[c])) for c in row) for row in model.y]
    tau = int(round(report.objective))
    return {
        "report": report,
        "candidate": {"x": x, "schemes": schemes, "tau": tau},
        "upper_bound": float(tau),
        "feedback": "MASTER_SOLVED",
        "messages": [f"Master: tau={tau} ({report.nodes} B&B nodes, {report.seconds:.2f}s)."],
    }


def separate_node(state: BendersState):
    cand = state["candidate"]
    started = time.perf_counter()
    outcome = separate(state["instance"], cand["x"], cand["schemes"], cand["tau"])
    record = {
        "iteration": state.get("iteration", 0),
        "objective": cand["tau"],
        "blocks": len(state["model"].blocks),
        "big_m": state["big_m"],
        "master_seconds": round(state["report"].seconds, 6),
        "seconds": round(time.perf_counter() - started + state["report"].seconds, 6),
    }
    update: dict = {}
    if isinstance(outcome, Violation):
        if outcome.label in state["model"].blocks:
            raise SolverFailure(f"separation returned the instantiated label {outcome.label}")
        record.update(label=list(outcome.label), violation_value=outcome.value,
                      scenario="".join(map(str, outcome.scenario)))
        update.update(violation={"scenario": outcome.scenario, "label": outcome.label, "value": outcome.value},
                      feedback="VIOLATION")
        kind = "L+" if outcome.value is None else f"value {outcome.value}"
        msg = f"Separation: violated at {record['scenario']} ({kind}), label {outcome.label}."
    else:
        record.update(label=None, violation_value=None, scenario=None)
        update.update(violation=None, feedback="CERTIFIED")
        msg = f"Separation: certified tau={cand['tau']}."

    # Without an L+ hit the scan covered every scenario, so the value is exact.
    exact = outcome.value
    incumbent = state.get("incumbent")
    if exact is not None and (incumbent is None or exact > incumbent["value"]):
        update["incumbent"] = {"x": cand["x"], "schemes": cand["schemes"], "value": exact}

    _write_trace(state.get("trace_path"), record)
    logger.info("[Benders] it %d: tau=%s %s", record["iteration"], cand["tau"], msg)
    update["iterations"] = [record]
    update["messages"] = [msg]
    return update


def add_block_node(state: BendersState):
    label = state["violation"]["label"]
    add_block(state["model"], label)
    iteration = state.get("iteration", 0) + 1
    feedback = "ITERATION_LIMIT" if iteration >= state["max_iterations"] else "BLOCK_ADDED"
    update = {"iteration": iteration, "feedback": feedback,
              "messages": [f"Block {label} added ({len(state['model'].blocks)} total)."]}
    if feedback == "ITERATION_LIMIT":
        update["status"] = "iteration_limit"
    return update


def audit_node(state: BendersState):
    """Exact value of the certified decision must equal the master objective."""
    inst, cand = state["instance"], state["candidate"]
    exact = kadapt_value(inst, cand["x"], cand["schemes"])
    if exact != cand["tau"]:
        logger.warning("[Benders] audit: master tau=%s, exact value %s (M=%g)", cand["tau"], exact, state["big_m"])
        return {"feedback": "AUDIT_FAILED",
                "messages": [f"Audit: tau={cand['tau']} but exact value {exact}; dual caps binding."]}
    solution = KAdaptSolution(
        MonitorSet(cand["x"], inst.budget),
        [CoveringScheme(y, inst.floors) for y in cand["schemes"]],
        cand["tau"],
    )
    return {"solution": solution, "status": SolveStatus.OPTIMAL.value, "feedback": "AUDIT_PASSED",
            "messages": [f"Audit: passed, tau={cand['tau']}."]}


def rebuild_master_node(state: BendersState):
    doublings = state.get("doublings", 0) + 1
    if doublings > BIG_M_MAX_DOUBLINGS:
        raise BigMAuditError(f"tau still disagrees with the exact value after {BIG_M_MAX_DOUBLINGS} doublings "
                             f"(M={state['big_m']:g})")
    big_m = state["big_m"] * 2
    model = rebuild(state["model"], big_m)
    logger.info("[Benders] rebuilding master with M=%g (%d blocks)", big_m, len(model.blocks))
    return {"model": model, "big_m": big_m, "doublings": doublings, "feedback": "REBUILT",
            "messages": [f"Master rebuilt with M={big_m:g}."]}
