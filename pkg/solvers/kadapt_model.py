"""
solvers/kadapt_model.py
=======================
Mixed-integer reformulation of the K-adaptability covering problem.

The master part holds ``tau`` (integer, ``0 <= tau <= N``), monitors ``x``
(``e'x <= I``) and K candidate schemes ``y^k`` meeting the group floors.
Each label ``l in {0..N}^K`` adds one block of continuous dual variables
that certifies, for the current ``(x, y)``, either

* ``l in L0``: ``tau <= D(l) + sum_{k: l_k = 0} lambda_k e'y^k`` with
  ``lambda`` on the simplex over the feasible schemes, or
* ``l in L+``: ``D(l) >= 1`` (the scenario cell of ``l`` must be empty),

where ``D(l) = b'alpha - e'theta + sum_{l_k>0} (1 - y^k_{l_k}) nu_k
+ sum_{l_k=0} sum_n y^k_n beta^k_n`` and, for every node ``m``,

    theta_m >= (A'alpha)_m - x_m H_m + x_m G_m
    H_m = sum_{k: l_k > 0, m covers l_k} nu_k
    G_m = sum_{k: l_k = 0} sum_{n covered by m} beta^k_n

Dual variables are capped at ``M`` (default ``10 N``).  The cap is
audited after every solve by recomputing the exact value of the extracted
decision; ``solve_full`` doubles ``M`` on a failed audit.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config.settings import BIG_M_MAX_DOUBLINGS, BLOCK_CAP, big_m_for
from solvers.baselines import kadapt_value
from tools.errors import BigMAuditError, CapExceededError, InputError
from tools.instance import CoveringInstance
from tools.netmodel import CoveringScheme, MonitorSet
from tools.solver_kernel import (
    MilpModel,
    Sense,
    SolveReport,
    SolveStatus,
    linearize_product,
    solve_milp,
)
from tools.uncertainty import LabelVector, all_labels, is_positive

logger = logging.getLogger(__name__)


@dataclass
class LabelBlock:
    label: LabelVector
    theta: list[int]
    alpha: list[int]
    nu: dict[int, int]
    beta: dict[tuple[int, int], int]
    lam: dict[int, int]

    @property
    def positive(self) -> bool:
        return is_positive(self.label)


@dataclass
class KAdaptModel:
    instance: CoveringInstance
    k: int
    big_m: float
    milp: MilpModel
    tau: int
    x: list[int]
    y: list[list[int]]
    blocks: dict[LabelVector, LabelBlock] = field(default_factory=dict)
    symmetry: bool = False

    @property
    def labels(self) -> list[LabelVector]:
        return list(self.blocks)


@dataclass
class KAdaptSolution:
    x: MonitorSet
    schemes: list[CoveringScheme]
    tau: int


@dataclass
class KAdaptResult:
    status: SolveStatus
    solution: Optional[KAdaptSolution]
    report: SolveReport
    model: KAdaptModel
    doublings: int = 0
    seconds: float = 0.0


# ────────────────────────────────────────────────────────────────────
# Construction
# ────────────────────────────────────────────────────────────────────

def build_master(instance: CoveringInstance, k: int, big_m: float | None = None,
                 symmetry: bool = True) -> KAdaptModel:
    """``max { tau : tau <= N, x in X, y^1..y^K in Y }`` with no label blocks."""
    if k < 1:
        raise InputError(f"K must be at least 1, got {k}")
    n = instance.node_count
    milp = MilpModel(f"kadapt_K{k}", maximize=True, integral_objective=True)
    tau = milp.add_var("tau", 0.0, float(n), obj=1.0, integer=True)
    x = [milp.add_binary(f"x[{v}]") for v in range(n)]
    milp.add_row({col: 1.0 for col in x}, Sense.LE, float(instance.budget), "budget")
    y = [[milp.add_binary(f"y[{s}][{v}]") for v in range(n)] for s in range(k)]
    for s in range(k):
        for c, floor in enumerate(instance.floors):
            if floor > 0:
                members = instance.partition.members(c)
                milp.add_row({y[s][v]: 1.0 for v in members}, Sense.GE, float(floor), f"floor[{s}][{c}]")
    model = KAdaptModel(instance, k, big_m or big_m_for(n), milp, tau, x, y)
    if symmetry:
        add_symmetry_breaking(model)
    return model


def add_symmetry_breaking(model: KAdaptModel) -> KAdaptModel:
    """Require ``y^1 >=_lex y^2 >=_lex ... >=_lex y^K``.

    For each consecutive pair, ``d_n = y^k_n XOR y^{k+1}_n`` and
    ``e_n = 1`` iff the two schemes agree on positions ``< n``; then
    ``y^{k+1}_n - y^k_n <= 1 - e_n``.
    """
    if model.k < 2 or model.symmetry:
        return model
    milp, n = model.milp, model.instance.node_count
    for s in range(model.k - 1):
        a, b = model.y[s], model.y[s + 1]
        prefix_equal: Optional[int] = None   # e_0 = 1
        for v in range(n):
            if prefix_equal is None:
                milp.add_row({b[v]: 1.0, a[v]: -1.0}, Sense.LE, 0.0, f"lex[{s}][{v}]")
            else:
                milp.add_row({b[v]: 1.0, a[v]: -1.0, prefix_equal: 1.0}, Sense.LE, 1.0, f"lex[{s}][{v}]")
            if v == n - 1:
                break
            d = milp.add_var(f"diff[{s}][{v}]", 0.0, 1.0)
            milp.add_row({d: 1.0, a[v]: -1.0, b[v]: 1.0}, Sense.GE, 0.0, f"diff_a[{s}][{v}]")
            milp.add_row({d: 1.0, a[v]: 1.0, b[v]: -1.0}, Sense.GE, 0.0, f"diff_b[{s}][{v}]")
            milp.add_row({d: 1.0, a[v]: -1.0, b[v]: -1.0}, Sense.LE, 0.0, f"diff_c[{s}][{v}]")
            milp.add_row({d: 1.0, a[v]: 1.0, b[v]: 1.0}, Sense.LE, 2.0, f"diff_d[{s}][{v}]")
            e = milp.add_var(f"eq[{s}][{v + 1}]", 0.0, 1.0)
            milp.add_row({e: 1.0, d: 1.0}, Sense.LE, 1.0, f"eq_d[{s}][{v + 1}]")
            if prefix_equal is None:
                milp.add_row({e: 1.0, d: 1.0}, Sense.GE, 1.0, f"eq_lo[{s}][{v + 1}]")
            else:
                milp.add_row({e: 1.0, prefix_equal: -1.0}, Sense.LE, 0.0, f"eq_up[{s}][{v + 1}]")
                milp.add_row({e: 1.0, prefix_equal: -1.0, d: 1.0}, Sense.GE, 0.0, f"eq_lo[{s}][{v + 1}]")
            prefix_equal = e
    model.symmetry = True
    return model


def add_block(model: KAdaptModel, label: LabelVector) -> LabelBlock:
    """Instantiate the dual block of ``label`` (raises on a duplicate label)."""
    label = tuple(int(e) for e in label)
    inst, milp, big_m = model.instance, model.milp, model.big_m
    n = inst.node_count
    if len(label) != model.k or any(not 0 <= e <= n for e in label):
        raise InputError(f"label {label} is not in {{0..{n}}}^{model.k}")
    if label in model.blocks:
        raise InputError(f"label {label} already has a block")

    g = inst.graph
    a_mat, b_vec = inst.uncertainty.as_polyhedral()
    tag = "l" + "_".join(map(str, label))
    violated = [s for s, e in enumerate(label) if e > 0]
    feasible = [s for s, e in enumerate(label) if e == 0]

    alpha = [milp.add_var(f"alpha[{tag}][{r}]", 0.0, big_m) for r in range(a_mat.shape[0])]
    nu = {s: milp.add_var(f"nu[{tag}][{s}]", 0.0, big_m) for s in violated}
    beta = {(s, v): milp.add_var(f"beta[{tag}][{s}][{v}]", 0.0, big_m) for s in feasible for v in range(n)}
    lam = {s: milp.add_var(f"lambda[{tag}][{s}]", 0.0, 1.0) for s in feasible}

    theta = []
    for m in range(n):
        h_terms = {nu[s]: 1.0 for s in violated if m in g.in_neighbors[label[s] - 1]}
        g_terms = {beta[(s, v)]: 1.0 for s in feasible for v in g.out_neighbors[m]}
        theta_cap = big_m * (float(a_mat[:, m].sum()) + len(g_terms))
        th = milp.add_var(f"theta[{tag}][{m}]", 0.0, theta_cap)
        theta.append(th)
        row = {th: 1.0}
        for r in range(a_mat.shape[0]):
            if a_mat[r, m]:
                row[alpha[r]] = row.get(alpha[r], 0.0) - float(a_mat[r, m])
        if h_terms:
            p = linearize_product(milp, model.x[m], h_terms, big_m * len(h_terms), f"xH[{tag}][{m}]", "upper")
            row[p] = row.get(p, 0.0) + 1.0
        if g_terms:
            q = linearize_product(milp, model.x[m], g_terms, big_m * len(g_terms), f"xG[{tag}][{m}]", "lower")
            row[q] = row.get(q, 0.0) - 1.0
        milp.add_row(row, Sense.GE, 0.0, f"dual[{tag}][{m}]")

    # D(l) as a coefficient map.
    dual_obj: dict[int, float] = {}
    for r, col in enumerate(alpha):
        if b_vec[r]:
            dual_obj[col] = dual_obj.get(col, 0.0) + float(b_vec[r])
    for th in theta:
        dual_obj[th] = dual_obj.get(th, 0.0) - 1.0
    for s in violated:
        node = label[s] - 1
        r_col = linearize_product(milp, model.y[s][node], nu[s], big_m, f"yNu[{tag}][{s}]", "lower")
        dual_obj[nu[s]] = dual_obj.get(nu[s], 0.0) + 1.0
        dual_obj[r_col] = dual_obj.get(r_col, 0.0) - 1.0
    for s in feasible:
        for v in range(n):
            s_col = linearize_product(milp, model.y[s][v], beta[(s, v)], big_m, f"yBeta[{tag}][{s}][{v}]", "upper")
            dual_obj[s_col] = dual_obj.get(s_col, 0.0) + 1.0

    if feasible:
        milp.add_row({lam[s]: 1.0 for s in feasible}, Sense.EQ, 1.0, f"simplex[{tag}]")
        row = {model.tau: 1.0}
        for col, coef in dual_obj.items():
            row[col] = row.get(col, 0.0) - coef
        for s in feasible:
            for v in range(n):
                t_col = linearize_product(milp, model.y[s][v], lam[s], 1.0, f"yLam[{tag}][{s}][{v}]", "upper")
                row[t_col] = row.get(t_col, 0.0) - 1.0
        milp.add_row(row, Sense.LE, 0.0, f"value[{tag}]")
    else:
        milp.add_row(dual_obj, Sense.GE, 1.0, f"exclude[{tag}]")

    block = LabelBlock(label, theta, alpha, nu, beta, lam)
    model.blocks[label] = block
    return block


def block_count(node_count: int, k: int) -> int:
    return (node_count + 1) ** k


def build_full(instance: CoveringInstance, k: int, big_m: float | None = None,
               symmetry: bool = True, cap: int | None = None) -> KAdaptModel:
    """Master plus every one of the ``(N+1)^K`` label blocks."""
    cap = BLOCK_CAP if cap is None else cap
    count = block_count(instance.node_count, k)
    if count > cap:
        raise CapExceededError(f"label blocks (N={instance.node_count}, K={k})", count, cap)
    model = build_master(instance, k, big_m, symmetry)
    for label in all_labels(instance.node_count, k):
        add_block(model, label)
    return model


def rebuild(model: KAdaptModel, big_m: float) -> KAdaptModel:
    """Fresh model with the same labels and a new dual cap."""
    fresh = build_master(model.instance, model.k, big_m, model.symmetry)
    for label in model.blocks:
        add_block(fresh, label)
    return fresh


# ────────────────────────────────────────────────────────────────────
# Solution handling
# ────────────────────────────────────────────────────────────────────

def extract_solution(model: KAdaptModel, report: SolveReport, certify: bool = True) -> KAdaptSolution:
    """Read ``(x, y^1..y^K, tau)`` off an optimal report.

    With ``certify`` the exact value of the decision is recomputed by
    scenario enumeration; a mismatch means the dual caps were binding and
    raises :class:`BigMAuditError`.
    """
    if report.x is None:
        raise InputError(f"no solution to extract (status {report.status.value})")
    inst = model.instance
    n = inst.node_count
    xs = tuple(int(round(report.x[c])) for c in model.x)
    schemes = [CoveringScheme(tuple(int(round(report.x[c])) for c in row), inst.floors) for row in model.y]
    tau = int(round(report.x[model.tau]))
    solution = KAdaptSolution(MonitorSet(xs, inst.budget), schemes, tau)
    if certify:
        true_value = kadapt_value(inst, solution.x, [s.y for s in schemes])
        if true_value != tau:
            raise BigMAuditError(
                f"model value {tau} but exact value of the extracted decision is {true_value} "
                f"(M={model.big_m:g}, N={n}, {len(model.blocks)} blocks)")
    return solution


def model_stats(model: KAdaptModel) -> dict:
    """Size summary for regression tracking."""
    positive = sum(1 for label in model.blocks if is_positive(label))
    milp = model.milp
    return {
        "K": model.k,
        "node_count": model.instance.node_count,
        "blocks": len(model.blocks),
        "blocks_L0": len(model.blocks) - positive,
        "blocks_Lplus": positive,
        "rows": milp.num_rows,
        "columns": milp.num_vars,
        "binaries": int(np.sum(milp.integer)),
        "big_m": model.big_m,
        "symmetry_breaking": model.symmetry,
    }


def solve_full(instance: CoveringInstance, k: int, symmetry: bool = True,
               time_limit: float | None = None, big_m: float | None = None) -> KAdaptResult:
    """Build and solve the monolithic model, doubling ``M`` on failed audits."""
    started = time.perf_counter()
    m_value = big_m or big_m_for(instance.node_count)
    for doublings in range(BIG_M_MAX_DOUBLINGS + 1):
        model = build_full(instance, k, m_value, symmetry)
        logger.info("[KAdapt] monolithic model: %s", model_stats(model))
        report = solve_milp(model.milp, time_limit=time_limit)
        if not report.optimal:
            return KAdaptResult(report.status, None, report, model, doublings,
                                time.perf_counter() - started)
        try:
            solution = extract_solution(model, report)
        except BigMAuditError as exc:
            logger.warning("[KAdapt] audit failed (%s); doubling M to %g", exc, 2 * m_value)
            m_value *= 2
            continue
        return KAdaptResult(SolveStatus.OPTIMAL, solution, report, model, doublings,
                            time.perf_counter() - started)
    raise BigMAuditError(f"tau still disagrees with the exact value after {BIG_M_MAX_DOUBLINGS} doublings "
                         f"(last M={m_value / 2:g})")
