"""
tools/solver_kernel.py
======================
Self-contained LP / MILP kernel.

* ``LpModel`` / ``MilpModel``: row-wise model builders with variable bounds.
* ``solve_lp``: dense two-phase bounded-variable simplex on a numpy tableau.
  Variables at their upper bound are *complemented* (x = u - x̄) so that
  upper bounds never become rows.  Dantzig pricing, Bland's rule after a
  streak of degenerate pivots.  Pivots only touch the nonzero rows and
  columns of the pivot column and row, and rows that start feasible keep
  their slack basic instead of taking an artificial.
* ``solve_milp``: best-bound branch-and-bound, most-fractional branching.
  With an integral objective, ties on the rounded bound go to the deepest
  node first so incumbents appear early.
* ``linearize_product``: big-M (McCormick) rows for ``z = x * v`` with
  ``x`` binary and ``0 <= v <= U``; ``v`` may be a linear expression.
* ``to_lp_text``: fixed-grammar LP-file dump for cross-checking elsewhere.

Infeasible / unbounded / limits are reported through ``SolveStatus``, never
raised.
"""

from __future__ import annotations

import heapq
import logging
import math
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from config.settings import (
    FEAS_TOL,
    INT_TOL,
    LP_MAX_PIVOTS,
    MILP_NODE_LIMIT,
    MILP_TIME_LIMIT,
    OBJ_ROUND_TOL,
)
from tools.errors import InputError

logger = logging.getLogger(__name__)

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_BLAND_AFTER = 50
_DROP_TOL = 1e-12


# ────────────────────────────────────────────────────────────────────
# Model representation
# ────────────────────────────────────────────────────────────────────

class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    CAP_HIT = "cap_hit"
    TIME_LIMIT = "time_limit"
    NUMERICAL = "numerical"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass
class Row:
    coeffs: dict[int, float]
    sense: Sense
    rhs: float
    name: str


class LpModel:
    """Linear program ``opt c'x  s.t.  rows,  lo <= x <= hi``."""

    def __init__(self, name: str = "lp", maximize: bool = True):
        self.name = name
        self.maximize = maximize
        self.var_names: list[str] = []
        self.lo: list[float] = []
        self.hi: list[float] = []
        self.obj: list[float] = []
        self.integer: list[bool] = []
        self.rows: list[Row] = []
        self._dense: Optional[tuple] = None

    # -- variables -------------------------------------------------------
    def add_var(self, name: str, lo: float = 0.0, hi: float = math.inf, obj: float = 0.0) -> int:
        return self._add_var(name, lo, hi, obj, False)

    def _add_var(self, name: str, lo: float, hi: float, obj: float, integer: bool) -> int:
        if not math.isfinite(lo):
            raise InputError(f"variable {name}: lower bound must be finite")
        if hi < lo:
            raise InputError(f"variable {name}: upper bound {hi} below lower bound {lo}")
        self.var_names.append(name)
        self.lo.append(float(lo))
        self.hi.append(float(hi))
        self.obj.append(float(obj))
        self.integer.append(integer)
        return len(self.var_names) - 1

    def set_objective(self, coeffs: Mapping[int, float], maximize: bool | None = None) -> None:
        self.obj = [0.0] * self.num_vars
        for j, c in coeffs.items():
            self.obj[j] += float(c)
        if maximize is not None:
            self.maximize = maximize

    # -- rows ------------------------------------------------------------
    def add_row(self, coeffs: Mapping[int, float] | Iterable[tuple[int, float]],
                sense: Sense | str, rhs: float, name: str = "") -> int:
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict[int, float] = {}
        for j, a in items:
            if not 0 <= j < self.num_vars:
                raise InputError(f"row {name or len(self.rows)}: unknown column {j}")
            merged[j] = merged.get(j, 0.0) + float(a)
        merged = {j: a for j, a in merged.items() if a != 0.0}
        self.rows.append(Row(merged, Sense(sense), float(rhs), name or f"r{len(self.rows)}"))
        return len(self.rows) - 1

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def dense(self) -> tuple[np.ndarray, np.ndarray, list[Sense]]:
        # Rows and columns are append-only, so the shape identifies the matrix.
        shape = (self.num_rows, self.num_vars)
        if self._dense is not None and self._dense[0] == shape:
            return self._dense[1]
        a = np.zeros(shape)
        b = np.zeros(self.num_rows)
        for i, row in enumerate(self.rows):
            for j, v in row.coeffs.items():
                a[i, j] = v
            b[i] = row.rhs
        self._dense = (shape, (a, b, [row.sense for row in self.rows]))
        return self._dense[1]


class MilpModel(LpModel):
    """``LpModel`` plus integrality flags.

    ``integral_objective`` declares that every integer-feasible objective
    value is an integer; branch-and-bound then prunes nodes that cannot
    improve the incumbent by at least one.
    """

    def __init__(self, name: str = "milp", maximize: bool = True, integral_objective: bool = False):
        super().__init__(name, maximize)
        self.integral_objective = integral_objective

    def add_var(self, name: str, lo: float = 0.0, hi: float = math.inf, obj: float = 0.0,
                integer: bool = False) -> int:
        if integer and (lo != math.floor(lo) or (math.isfinite(hi) and hi != math.floor(hi))):
            raise InputError(f"integer variable {name} needs integer bounds")
        return self._add_var(name, lo, hi, obj, integer)

    def add_binary(self, name: str, obj: float = 0.0) -> int:
        return self.add_var(name, 0.0, 1.0, obj, integer=True)


@dataclass
class SolveReport:
    status: SolveStatus
    objective: Optional[float] = None
    x: Optional[np.ndarray] = None
    incumbent: Optional[float] = None
    bound: Optional[float] = None
    nodes: int = 0
    pivots: int = 0
    seconds: float = 0.0
    message: str = ""
    incumbent_trace: list[tuple[int, float]] = field(default_factory=list)
    bound_trace: list[tuple[int, float]] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def value(self, j: int) -> float:
        if self.x is None:
            raise InputError("no solution available")
        return float(self.x[j])


# ────────────────────────────────────────────────────────────────────
# Feasibility check
# ────────────────────────────────────────────────────────────────────

def check_feasibility(m: LpModel, x: Sequence[float], tol: float = FEAS_TOL,
                      check_integrality: bool = True) -> list[str]:
    """Independent re-evaluation of bounds, rows and integrality.

    Returns the names of everything violated beyond ``tol`` (scaled by the
    magnitude of the row terms); an empty list means feasible.
    """
    x = np.asarray(x, dtype=float)
    problems = []
    for j in range(m.num_vars):
        if x[j] < m.lo[j] - tol or x[j] > m.hi[j] + tol:
            problems.append(f"bound:{m.var_names[j]}")
        if check_integrality and m.integer[j] and abs(x[j] - round(x[j])) > INT_TOL:
            problems.append(f"integrality:{m.var_names[j]}")
    for row in m.rows:
        terms = [a * x[j] for j, a in row.coeffs.items()]
        lhs = math.fsum(terms)
        scale = max(1.0, abs(row.rhs), max((abs(t) for t in terms), default=0.0))
        slack = lhs - row.rhs
        bad = (row.sense is Sense.LE and slack > tol * scale) or \
              (row.sense is Sense.GE and slack < -tol * scale) or \
              (row.sense is Sense.EQ and abs(slack) > tol * scale)
        if bad:
            problems.append(f"row:{row.name}")
    return problems


# ────────────────────────────────────────────────────────────────────
# Simplex internals
# ────────────────────────────────────────────────────────────────────

def _pivot(t: np.ndarray, i: int, j: int) -> None:
    """Gauss-Jordan step on ``(i, j)``, touching only rows and columns that change."""
    t[i, :] /= t[i, j]
    factor = t[:, j].copy()
    factor[i] = 0.0
    rows = np.flatnonzero(factor)
    if rows.size:
        prow = t[i, :]
        cols = np.flatnonzero(prow)
        if 2 * cols.size < t.shape[1]:
            cell = np.ix_(rows, cols)
            block = t[cell] - np.outer(factor[rows], prow[cols])
            block[np.abs(block) < _DROP_TOL] = 0.0
            t[cell] = block
        else:
            t[rows, :] -= np.outer(factor[rows], prow)
    t[:, j] = 0.0
    t[i, j] = 1.0


def _complement(t: np.ndarray, j: int, u: float) -> None:
    t[:, -1] -= t[:, j] * u
    t[:, j] = -t[:, j]


def _iterate(t: np.ndarray, basis: list[int], flipped: np.ndarray, upper: np.ndarray,
             allowed: np.ndarray, max_pivots: int) -> tuple[str, int]:
    """Run simplex iterations on ``t`` (last row = reduced costs, minimising)."""
    m = t.shape[0] - 1
    n = t.shape[1] - 1
    pivots = 0
    degenerate = 0
    while True:
        d = t[-1, :n]
        candidates = np.flatnonzero((d < -_COST_TOL) & allowed)
        if candidates.size == 0:
            return "optimal", pivots
        if pivots >= max_pivots:
            return "cap", pivots
        bland = degenerate > _BLAND_AFTER
        j = int(candidates[0]) if bland else int(candidates[np.argmin(d[candidates])])

        col = t[:m, j]
        rhs = np.maximum(t[:m, n], 0.0)
        ratios = np.full(m, np.inf)
        pos = col > _PIVOT_TOL
        neg = col < -_PIVOT_TOL
        ratios[pos] = rhs[pos] / col[pos]
        ub = upper[basis] if m else np.zeros(0)
        finite_neg = neg & np.isfinite(ub)
        ratios[finite_neg] = np.maximum(ub[finite_neg] - rhs[finite_neg], 0.0) / -col[finite_neg]

        step = ratios.min() if m else np.inf
        if not math.isfinite(step) and not math.isfinite(upper[j]):
            return "unbounded", pivots

        if upper[j] <= step:
            _complement(t, j, upper[j])
            flipped[j] = not flipped[j]
            step = upper[j]
        else:
            ties = np.flatnonzero(ratios <= step + _PIVOT_TOL)
            if bland:
                i = int(min(ties, key=lambda r: basis[r]))
            else:
                i = int(max(ties, key=lambda r: abs(col[r])))
            leaving = basis[i]
            at_upper = bool(neg[i])
            _pivot(t, i, j)
            basis[i] = j
            if at_upper:
                _complement(t, leaving, upper[leaving])
                flipped[leaving] = not flipped[leaving]
        pivots += 1
        degenerate = degenerate + 1 if step <= _PIVOT_TOL else 0


def _solve_bounded(m: LpModel, lo: np.ndarray, hi: np.ndarray, max_pivots: int) -> SolveReport:
    started = time.perf_counter()
    n = m.num_vars
    if np.any(hi < lo - FEAS_TOL):
        return SolveReport(SolveStatus.INFEASIBLE, message="empty variable bounds",
                           seconds=time.perf_counter() - started)
    hi = np.maximum(hi, lo)
    a, b, senses = m.dense()
    b = b - a @ lo
    u = hi - lo
    rows = a.shape[0]

    # Standard form: slack columns, then artificial columns.
    slack_sign = np.array([1.0 if s is Sense.LE else -1.0 if s is Sense.GE else 0.0 for s in senses])
    has_slack = slack_sign != 0.0
    slack_cols = np.flatnonzero(has_slack)
    n_slack = slack_cols.size
    # A >= row with b <= 0 (or a <= row with b >= 0) starts with its slack basic;
    # only the rest need an artificial column.
    flip_row = (b < 0) | ((slack_sign < 0) & (b <= 0))
    basis: list[int] = []
    art_rows: list[int] = []
    for i in range(rows):
        s = slack_sign[i] * (-1.0 if flip_row[i] else 1.0)
        if has_slack[i] and s > 0:
            basis.append(n + int(np.searchsorted(slack_cols, i)))
        else:
            basis.append(-1)
            art_rows.append(i)
    n_art = len(art_rows)
    width = n + n_slack + n_art
    t = np.zeros((rows + 1, width + 1))
    t[:rows, :n] = a
    for k, i in enumerate(slack_cols):
        t[i, n + k] = slack_sign[i]
    t[:rows, -1] = b
    t[:rows][flip_row] *= -1.0
    for k, i in enumerate(art_rows):
        t[i, n + n_slack + k] = 1.0
        basis[i] = n + n_slack + k

    upper = np.concatenate([u, np.full(n_slack + n_art, np.inf)])
    flipped = np.zeros(width, dtype=bool)
    pivots = 0

    if n_art:
        t[-1, :] -= t[art_rows, :].sum(axis=0)
        t[-1, n + n_slack:width] = 0.0
        allowed = np.ones(width, dtype=bool)
        status, used = _iterate(t, basis, flipped, upper, allowed, max_pivots)
        pivots += used
        if status == "cap":
            return SolveReport(SolveStatus.CAP_HIT, pivots=pivots, message="pivot cap in phase 1",
                               seconds=time.perf_counter() - started)
        infeasibility = -t[-1, -1]
        if infeasibility > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return SolveReport(SolveStatus.INFEASIBLE, pivots=pivots,
                               seconds=time.perf_counter() - started)
        # Drive remaining artificials out of the basis; drop redundant rows.
        first_art = n + n_slack
        i = 0
        while i < t.shape[0] - 1:
            if basis[i] >= first_art:
                row = t[i, :first_art]
                nz = np.flatnonzero(np.abs(row) > 1e-7)
                in_basis = set(basis)
                nz = [c for c in nz if c not in in_basis]
                if nz:
                    _pivot(t, i, int(nz[0]))
                    basis[i] = int(nz[0])
                else:
                    t = np.delete(t, i, axis=0)
                    basis.pop(i)
                    continue
            i += 1
        t = np.delete(t, np.s_[first_art:width], axis=1)
        upper = upper[:first_art]
        flipped = flipped[:first_art]
        width = first_art

    cost = np.zeros(width)
    c = np.asarray(m.obj, dtype=float)
    cost[:n] = -c if m.maximize else c
    t[-1, :] = 0.0
    t[-1, :width] = np.where(flipped, -cost, cost)
    t[-1, -1] = -float(np.sum(cost[flipped] * upper[flipped]))
    for i, bj in enumerate(basis):
        if t[-1, bj] != 0.0:
            t[-1, :] -= t[-1, bj] * t[i, :]
    status, used = _iterate(t, basis, flipped, upper, np.ones(width, dtype=bool), max_pivots - pivots)
    pivots += used
    elapsed = time.perf_counter() - started
    if status == "unbounded":
        return SolveReport(SolveStatus.UNBOUNDED, pivots=pivots, seconds=elapsed)
    if status == "cap":
        return SolveReport(SolveStatus.CAP_HIT, pivots=pivots, message="pivot cap in phase 2",
                           seconds=elapsed)

    vals = np.zeros(width)
    vals[basis] = t[:-1, -1]
    vals = np.where(flipped, upper - vals, vals)
    x = np.clip(lo + vals[:n], lo, hi)
    objective = float(c @ x)
    problems = check_feasibility(m, x, check_integrality=False)
    if problems:
        return SolveReport(SolveStatus.NUMERICAL, x=x, pivots=pivots, seconds=elapsed,
                           message=f"residual check failed on {problems[:3]}")
    return SolveReport(SolveStatus.OPTIMAL, objective=objective, x=x, pivots=pivots, seconds=elapsed)


# ────────────────────────────────────────────────────────────────────
# Public solvers
# ────────────────────────────────────────────────────────────────────

def solve_lp(m: LpModel, max_pivots: int | None = None) -> SolveReport:
    """Solve the continuous relaxation of ``m`` (integrality flags ignored)."""
    lo = np.asarray(m.lo, dtype=float)
    hi = np.asarray(m.hi, dtype=float)
    return _solve_bounded(m, lo, hi, max_pivots or LP_MAX_PIVOTS)


@dataclass(order=True)
class _Node:
    bound: float                                # ordering bound (rounded up for integral objectives)
    dive: int                                   # -depth among equal integral bounds, else 0
    seq: int
    key: float = field(compare=False)
    depth: int = field(compare=False)
    lo: np.ndarray = field(compare=False, repr=False)
    hi: np.ndarray = field(compare=False, repr=False)
    x: np.ndarray = field(compare=False, repr=False)


def _most_fractional(x: np.ndarray, integer: np.ndarray) -> int:
    frac = np.abs(x - np.round(x))
    frac[~integer] = 0.0
    j = int(np.argmax(frac))
    return j if frac[j] > INT_TOL else -1


def solve_milp(m: LpModel, time_limit: float | None = None, gap_tol: float = 0.0,
               node_limit: int | None = None) -> SolveReport:
    """Best-bound branch-and-bound on ``m``.

    Internally minimises; reported objective, incumbent and bounds are in
    the model's own sense.  ``incumbent_trace`` / ``bound_trace`` hold
    ``(node, value)`` pairs for monotonicity checks.
    """
    started = time.perf_counter()
    time_limit = MILP_TIME_LIMIT if time_limit is None else time_limit
    node_limit = MILP_NODE_LIMIT if node_limit is None else node_limit
    sign = -1.0 if m.maximize else 1.0
    integer = np.asarray(m.integer, dtype=bool)
    integral_obj = bool(getattr(m, "integral_objective", False))

    def user(v: float) -> float:
        return sign * v

    root_lo = np.asarray(m.lo, dtype=float)
    root_hi = np.asarray(m.hi, dtype=float)
    root_lo[integer] = np.ceil(root_lo[integer] - INT_TOL)
    root_hi[integer] = np.floor(root_hi[integer] + INT_TOL)

    best_x: Optional[np.ndarray] = None
    best = math.inf
    report = SolveReport(SolveStatus.INFEASIBLE)
    heap: list[_Node] = []
    seq = 0
    nodes = 0
    pivots = 0

    def can_improve(key: float) -> bool:
        if best_x is None:
            return True
        if integral_obj:
            return math.ceil(key - OBJ_ROUND_TOL) <= round(best) - 1
        return key < best - gap_tol * max(1.0, abs(best)) - 1e-9

    def ordering(key: float) -> float:
        return float(math.ceil(key - OBJ_ROUND_TOL)) if integral_obj else key

    def evaluate(lo: np.ndarray, hi: np.ndarray, depth: int) -> Optional[SolveReport]:
        nonlocal seq, nodes, pivots, best, best_x
        lp = _solve_bounded(m, lo, hi, LP_MAX_PIVOTS)
        nodes += 1
        pivots += lp.pivots
        if lp.status is SolveStatus.INFEASIBLE:
            return None
        if lp.status is not SolveStatus.OPTIMAL:
            return lp
        key = sign * lp.objective
        if not can_improve(key):
            return None
        j = _most_fractional(lp.x, integer)
        if j < 0:
            x = lp.x.copy()
            x[integer] = np.round(x[integer])
            if integer.any() and check_feasibility(m, x, check_integrality=False):
                # Rounding broke a row: re-solve with the integers fixed so the
                # continuous part is consistent with the rounded values.
                fixed_lo, fixed_hi = lo.copy(), hi.copy()
                fixed_lo[integer] = fixed_hi[integer] = np.round(x[integer])
                polish = _solve_bounded(m, fixed_lo, fixed_hi, LP_MAX_PIVOTS)
                pivots += polish.pivots
                if polish.status is not SolveStatus.OPTIMAL:
                    return SolveReport(SolveStatus.NUMERICAL, message="rounded incumbent infeasible")
                x = polish.x
                x[integer] = np.round(x[integer])
            value = sign * float(np.asarray(m.obj) @ x)
            if value < best:
                best, best_x = value, x
                report.incumbent_trace.append((nodes, user(best)))
                logger.debug("[B&B] node %d: incumbent %.6g (depth %d)", nodes, user(best), depth)
            return None
        seq += 1
        heapq.heappush(heap, _Node(ordering(key), -depth if integral_obj else 0, seq, key, depth, lo, hi, lp.x))
        return None

    failure = evaluate(root_lo, root_hi, 0)
    if failure is not None:
        failure.nodes, failure.seconds = nodes, time.perf_counter() - started
        return failure

    status = SolveStatus.OPTIMAL
    while heap:
        node = heapq.heappop(heap)
        if not can_improve(node.key):
            continue
        global_bound = min(node.bound, best)
        report.bound_trace.append((nodes, user(global_bound)))
        if time.perf_counter() - started > time_limit:
            heapq.heappush(heap, node)
            status = SolveStatus.TIME_LIMIT
            break
        if nodes >= node_limit:
            heapq.heappush(heap, node)
            status = SolveStatus.CAP_HIT
            break
        j = _most_fractional(node.x, integer)
        v = node.x[j]
        down_hi = node.hi.copy()
        down_hi[j] = math.floor(v)
        up_lo = node.lo.copy()
        up_lo[j] = math.ceil(v)
        for lo, hi in ((node.lo, down_hi), (up_lo, node.hi)):
            failure = evaluate(lo, hi, node.depth + 1)
            if failure is not None:
                failure.nodes, failure.seconds = nodes, time.perf_counter() - started
                return failure

    report.nodes = nodes
    report.pivots = pivots
    report.seconds = time.perf_counter() - started
    open_bound = min((nd.bound for nd in heap if can_improve(nd.key)), default=math.inf)
    if best_x is None:
        if status is SolveStatus.OPTIMAL:
            report.status = SolveStatus.INFEASIBLE
            logger.info("[B&B] %s: infeasible after %d nodes", m.name, nodes)
            return report
        report.status = status
        report.bound = user(open_bound)
        return report

    objective = user(best)
    if integral_obj and abs(objective - round(objective)) <= OBJ_ROUND_TOL:
        objective = float(round(objective))
    report.x = best_x
    report.incumbent = objective
    report.bound = user(min(open_bound, best))
    report.status = status
    if status is SolveStatus.OPTIMAL:
        report.objective = objective
        report.bound = objective
    logger.info("[B&B] %s: %s objective=%s nodes=%d pivots=%d %.2fs", m.name, report.status.value,
                objective, nodes, pivots, report.seconds)
    return report


# ────────────────────────────────────────────────────────────────────
# Big-M product linearization
# ────────────────────────────────────────────────────────────────────

def linearize_product(m: MilpModel, x: int, v: int | Mapping[int, float], upper: float | None, name: str,
                      direction: str = "both") -> int:
    """Add ``z = x * v`` for binary ``x`` and ``0 <= v <= upper``; returns ``z``.

    ``v`` is a column or a linear expression ``{column: coefficient}``; the
    expression form saves a defining column and row for sums of duals.

    ``direction`` selects which McCormick side is emitted:

    * ``"upper"``: ``z <= U x``, ``z <= v``  (z may only be pushed down)
    * ``"lower"``: ``z >= v - U (1 - x)``, ``z >= 0``  (z may only be pushed up)
    * ``"both"`` : all four rows, exact for binary ``x``.
    """
    if upper is None or not math.isfinite(upper) or upper < 0:
        raise InputError(f"{name}: linearization needs a finite upper bound on the continuous factor")
    if not (m.integer[x] and m.lo[x] >= 0 and m.hi[x] <= 1):
        raise InputError(f"{name}: first factor {m.var_names[x]} is not binary")
    if direction not in ("both", "upper", "lower"):
        raise InputError(f"{name}: unknown direction {direction!r}")
    factor = [(v, 1.0)] if isinstance(v, (int, np.integer)) else [(j, float(a)) for j, a in v.items()]
    if not factor:
        raise InputError(f"{name}: empty continuous factor")
    u = float(upper)
    z = m.add_var(name, 0.0, u)
    minus_v = [(j, -a) for j, a in factor]
    if direction in ("both", "upper"):
        m.add_row({z: 1.0, x: -u}, Sense.LE, 0.0, f"{name}_ux")
        m.add_row([(z, 1.0)] + minus_v, Sense.LE, 0.0, f"{name}_uv")
    if direction in ("both", "lower"):
        m.add_row([(z, 1.0), (x, -u)] + minus_v, Sense.GE, -u, f"{name}_lv")
    return z


# ────────────────────────────────────────────────────────────────────
# LP-file dump
# ────────────────────────────────────────────────────────────────────

_SAFE = re.compile(r"[^A-Za-z0-9_.]")


def _lp_name(name: str) -> str:
    cleaned = _SAFE.sub("_", name)
    return cleaned if cleaned and not cleaned[0].isdigit() else f"v_{cleaned}"


def _lp_expr(terms: Iterable[tuple[int, float]], names: list[str]) -> str:
    parts = []
    for j, a in terms:
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {abs(a):.12g} {names[j]}")
    text = " ".join(parts) if parts else "0"
    return text[2:] if text.startswith("+ ") else text


def to_lp_text(m: LpModel) -> str:
    """Render ``m`` in CPLEX-LP grammar (Maximize/Minimize, Subject To, Bounds,
    Generals, End)."""
    names = [_lp_name(f"{n}_{j}") for j, n in enumerate(m.var_names)]
    lines = [f"\\ {m.name}", "Maximize" if m.maximize else "Minimize"]
    lines.append(" obj: " + _lp_expr(((j, c) for j, c in enumerate(m.obj) if c), names))
    lines.append("Subject To")
    for row in m.rows:
        lhs = _lp_expr(sorted(row.coeffs.items()), names)
        lines.append(f" {_lp_name(row.name)}: {lhs} {row.sense.value} {row.rhs:.12g}")
    lines.append("Bounds")
    for j, name in enumerate(names):
        hi = "+inf" if not math.isfinite(m.hi[j]) else f"{m.hi[j]:.12g}"
        lines.append(f" {m.lo[j]:.12g} <= {name} <= {hi}")
    generals = [names[j] for j in range(m.num_vars) if m.integer[j]]
    if generals:
        lines.append("Generals")
        lines.extend(f" {g}" for g in generals)
    lines.append("End")
    return "\n".join(lines) + "\n"
