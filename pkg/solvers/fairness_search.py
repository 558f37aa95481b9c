"""
solvers/fairness_search.py
==========================
Maximin group fairness by searching the largest feasible floor level ``W``
on a grid (default step 0.04 over [0, 1]).

Feasibility is monotone in ``W`` (a higher W only raises floors), so the
grid is binary searched; ``full_sweep`` solves every grid point instead.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config.settings import W_STEP
from solvers.baselines import evaluate_worst_case
from solvers.exact_oracle import solve_rc_fair
from solvers.kadapt_model import solve_full
from tools.errors import InfeasibleError, SolverFailure
from tools.instance import CoveringInstance
from tools.netmodel import CoveringScheme, MonitorSet
from tools.solver_kernel import SolveStatus
from tools.uncertainty import UncertaintySet

logger = logging.getLogger(__name__)


class FairnessConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    step: float = Field(default=W_STEP, gt=0.0)
    w_min: float = Field(default=0.0, ge=0.0)
    w_max: float = Field(default=1.0, ge=0.0)
    solver: Literal["oracle", "monolithic", "benders"] = "benders"
    k: int = Field(default=1, ge=1)
    full_sweep: bool = False
    time_limit: Optional[float] = None

    @model_validator(mode="after")
    def _ordered(self) -> "FairnessConfig":
        if self.w_max < self.w_min:
            raise ValueError(f"w_max {self.w_max} is below w_min {self.w_min}")
        return self

    def grid(self) -> list[float]:
        count = int(math.floor((self.w_max - self.w_min) / self.step + 1e-9))
        return [round(self.w_min + i * self.step, 10) for i in range(count + 1)]


@dataclass
class FairSolve:
    w: float
    feasible: bool
    status: str
    x: Optional[MonitorSet] = None
    schemes: Optional[list[CoveringScheme]] = None
    tau: Optional[int] = None


@dataclass
class FairnessResult:
    w_star: float
    best: FairSolve
    solves: list[FairSolve]

    @property
    def tau(self) -> Optional[int]:
        return self.best.tau


def solve_at(instance: CoveringInstance, w: float, cfg: FairnessConfig) -> FairSolve:
    """One solve with the floors of level ``w``."""
    inst = instance.with_fairness(w)
    if not inst.floors_reachable:
        return FairSolve(w, False, SolveStatus.INFEASIBLE.value)
    if cfg.solver == "oracle":
        res = solve_rc_fair(inst)
        if not res.feasible:
            return FairSolve(w, False, SolveStatus.INFEASIBLE.value)
        return FairSolve(w, True, SolveStatus.OPTIMAL.value, res.x, None, res.optimum)
    if cfg.solver == "monolithic":
        res = solve_full(inst, cfg.k, time_limit=cfg.time_limit)
        if res.status is SolveStatus.INFEASIBLE:
            return FairSolve(w, False, res.status.value)
        if res.solution is None:
            raise SolverFailure(f"monolithic solve at W={w:g} ended with status {res.status.value}")
        sol = res.solution
        return FairSolve(w, True, res.status.value, sol.x, sol.schemes, sol.tau)
    from graph.workflow import run_benders

    res = run_benders(inst, cfg.k, time_limit=cfg.time_limit)
    if res.status == SolveStatus.INFEASIBLE.value:
        return FairSolve(w, False, res.status)
    if res.solution is None:
        raise SolverFailure(f"benders solve at W={w:g} ended with status {res.status}")
    sol = res.solution
    return FairSolve(w, True, res.status, sol.x, sol.schemes, sol.tau)


def _certify(instance: CoveringInstance, solve: FairSolve) -> None:
    floors = instance.partition.floors(solve.w)
    report = evaluate_worst_case(instance.graph, instance.partition, solve.x, instance.uncertainty)
    if not report.meets_floors(floors):
        raise SolverFailure(f"solution at W={solve.w:g} misses floors {floors}: "
                            f"worst-case group coverage {report.worst_by_group}")


def sweep(instance: CoveringInstance, cfg: FairnessConfig) -> list[FairSolve]:
    """Solve every grid point (monotonicity checks, plots)."""
    return [solve_at(instance, w, cfg) for w in cfg.grid()]


def max_feasible_w(instance: CoveringInstance, cfg: FairnessConfig | None = None) -> FairnessResult:
    """Largest grid ``W`` with a feasible solve, and that solve."""
    cfg = cfg or FairnessConfig()
    grid = cfg.grid()
    cache: dict[int, FairSolve] = {}

    def at(i: int) -> FairSolve:
        if i not in cache:
            cache[i] = solve_at(instance, grid[i], cfg)
            logger.info("[FairSearch] W=%g: %s tau=%s", grid[i], cache[i].status, cache[i].tau)
        return cache[i]

    if cfg.full_sweep:
        for i in range(len(grid)):
            at(i)
        feasible = [i for i in range(len(grid)) if cache[i].feasible]
        if not feasible:
            raise InfeasibleError(f"no feasible solution even at W={grid[0]:g}")
        lo = max(feasible)
    else:
        if not at(0).feasible:
            raise InfeasibleError(f"no feasible solution even at W={grid[0]:g}")
        lo, hi = 0, len(grid) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if at(mid).feasible:
                lo = mid
            else:
                hi = mid - 1
    best = cache[lo]
    _certify(instance, best)
    solves = [cache[i] for i in sorted(cache)]
    logger.info("[FairSearch] W*=%g after %d solves", grid[lo], len(solves))
    return FairnessResult(grid[lo], best, solves)


def w_by_budget(instance: CoveringInstance, budgets: Sequence[int],
                cfg: FairnessConfig | None = None) -> pd.DataFrame:
    """W* per failure budget J (one row per J)."""
    rows = []
    for j in budgets:
        inst = instance.with_uncertainty(UncertaintySet.budget(instance.node_count, j))
        try:
            res = max_feasible_w(inst, cfg)
            rows.append({"J": j, "W_star": res.w_star, "tau": res.tau})
        except InfeasibleError:
            rows.append({"J": j, "W_star": None, "tau": None})
    return pd.DataFrame(rows, columns=["J", "W_star", "tau"])
