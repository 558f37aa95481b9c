import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from langgraph.graph import StateGraph, END

from config.settings import MILP_TIME_LIMIT, big_m_for
from data.checkpoints import BendersState
from graph.nodes import (
    init_master_node,
    solve_master_node,
    separate_node,
    add_block_node,
    audit_node,
    rebuild_master_node,
)
from solvers.kadapt_model import KAdaptSolution, block_count
from tools.instance import CoveringInstance
from tools.netmodel import CoveringScheme, MonitorSet

logger = logging.getLogger(__name__)


def build_benders_graph():
    workflow = StateGraph(BendersState)

    workflow.add_node("init_master", init_master_node)
    workflow.add_node("solve_master", solve_master_node)
    workflow.add_node("separate", separate_node)
    workflow.add_node("add_block", add_block_node)
    workflow.add_node("audit", audit_node)
    workflow.add_node("rebuild_master", rebuild_master_node)

    # --- Routing Functions ---
    def master_routing(state):
        if state.get("feedback") == "MASTER_SOLVED":
            return "separate"
        return END

    def separation_routing(state):
        if state.get("feedback") == "VIOLATION":
            return "add_block"
        return "audit"

    def block_routing(state):
        if state.get("feedback") == "ITERATION_LIMIT":
            return END
        return "solve_master"

    def audit_routing(state):
        if state.get("feedback") == "AUDIT_FAILED":
            return "rebuild_master"
        return END

    # --- Connections ---
    workflow.set_entry_point("init_master")
    workflow.add_edge("init_master", "solve_master")
    workflow.add_edge("rebuild_master", "solve_master")

    workflow.add_conditional_edges(
        "solve_master",
        master_routing,
        {"separate": "separate", "__end__": END},
    )
    workflow.add_conditional_edges(
        "separate",
        separation_routing,
        {"add_block": "add_block", "audit": "audit"},
    )
    workflow.add_conditional_edges(
        "add_block",
        block_routing,
        {"solve_master": "solve_master", "__end__": END},
    )
    workflow.add_conditional_edges(
        "audit",
        audit_routing,
        {"rebuild_master": "rebuild_master", "__end__": END},
    )

    # State carries numpy-backed models, so no checkpointer.
    return workflow.compile()


@dataclass
class BendersResult:
    status: str
    solution: Optional[KAdaptSolution]
    incumbent: Optional[KAdaptSolution]
    bound: Optional[float]
    iterations: list[dict] = field(default_factory=list)
    labels: list[tuple[int, ...]] = field(default_factory=list)
    big_m: float = 0.0
    doublings: int = 0
    seconds: float = 0.0
    messages: list[str] = field(default_factory=list)

    @property
    def tau(self) -> Optional[int]:
        return None if self.solution is None else self.solution.tau


def run_benders(instance: CoveringInstance, k: int, symmetry: bool = True,
                time_limit: float | None = None, max_iterations: int | None = None,
                big_m: float | None = None, trace_path: str | Path | None = None) -> BendersResult:
    """Solve the K-adaptability model by adding one label block per iteration."""
    app = build_benders_graph()
    limit = block_count(instance.node_count, k) + 1 if max_iterations is None else max_iterations
    if trace_path:
        Path(trace_path).write_text("", encoding="utf-8")
    initial_state: BendersState = {
        "instance": instance,
        "k": k,
        "symmetry": symmetry,
        "time_limit": MILP_TIME_LIMIT if time_limit is None else time_limit,
        "max_iterations": limit,
        "trace_path": str(trace_path) if trace_path else None,
        "started": time.perf_counter(),
        "big_m": big_m or big_m_for(instance.node_count),
        "doublings": 0,
        "incumbent": None,
        "iterations": [],
        "messages": [],
    }
    # Four steps per iteration plus rebuilds.
    config = {"recursion_limit": 4 * (limit + 2) + 64}

    final: BendersState = initial_state
    for event in app.stream(initial_state, config, stream_mode="values"):
        final = event
        if event.get("messages"):
            logger.debug("[Benders] %s", event["messages"][-1])

    incumbent = None
    if final.get("incumbent"):
        inc = final["incumbent"]
        incumbent = KAdaptSolution(MonitorSet(inc["x"], instance.budget),
                                   [CoveringScheme(y, instance.floors) for y in inc["schemes"]],
                                   inc["value"])
    model = final.get("model")
    result = BendersResult(
        status=final.get("status", "unknown"),
        solution=final.get("solution"),
        incumbent=incumbent,
        bound=final.get("upper_bound"),
        iterations=list(final.get("iterations", [])),
        labels=list(model.blocks) if model is not None else [],
        big_m=final.get("big_m", 0.0),
        doublings=final.get("doublings", 0),
        seconds=time.perf_counter() - initial_state["started"],
        messages=list(final.get("messages", [])),
    )
    logger.info("[Benders] %s: tau=%s after %d iterations, %d blocks, %.2fs",
                result.status, result.tau, len(result.iterations), len(result.labels), result.seconds)
    return result
