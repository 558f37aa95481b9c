"""
tools/uncertainty.py
====================
Node-availability sets ``Xi = {0,1}^N ∩ {xi : A xi >= b}`` and the label
machinery of the K-adaptability reformulation.

Two constructors cover the CLI surface:

    UncertaintySet.budget(N, J)          # at most J nodes fail
    UncertaintySet.polyhedral(A, b)      # general upward-closed set

plus ``group_budget`` (at most ``J_c`` failures inside every group).
Polyhedral sets are accepted only with an entrywise nonnegative ``A``,
which certifies that the set is upward closed.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from pydantic import ValidationError

from config.schemas import PolyhedralFile
from config.settings import ENUM_CAP
from tools.errors import CapExceededError, InputError, SolverFailure
from tools.netmodel import Graph, GroupPartition, Scenario, as_binary_vector, cover_counts
from tools.solver_kernel import LpModel, Sense, SolveStatus, solve_lp

logger = logging.getLogger(__name__)

# Entry k of a label is 0 when scheme k is feasible, n + 1 when the coverage
# constraint of (0-based) node n is violated.
LabelVector = tuple[int, ...]


@dataclass(frozen=True)
class UncertaintySet:
    node_count: int
    kind: str
    fail_budget: int = 0
    A: tuple[tuple[float, ...], ...] = ()
    b: tuple[float, ...] = ()

    # -- constructors ---------------------------------------------------
    @classmethod
    def budget(cls, node_count: int, fail_budget: int) -> "UncertaintySet":
        if fail_budget < 0:
            raise InputError(f"failure budget J must be non-negative, got {fail_budget}")
        return cls(node_count, "budget", fail_budget=fail_budget)

    @classmethod
    def polyhedral(cls, A: Sequence[Sequence[float]], b: Sequence[float]) -> "UncertaintySet":
        a = np.asarray(A, dtype=float)
        if a.ndim != 2 or a.shape[0] != len(b) or a.shape[0] == 0:
            raise InputError(f"polyhedral set: A has shape {a.shape}, b has {len(b)} entries")
        if np.any(a < 0):
            r, c = map(int, np.argwhere(a < 0)[0])
            raise InputError(f"polyhedral set: A[{r}][{c}] = {a[r, c]} is negative; "
                             "only nonnegative A certifies an upward-closed set")
        return cls(a.shape[1], "polyhedral",
                   A=tuple(tuple(float(v) for v in row) for row in a),
                   b=tuple(float(v) for v in b))

    # -- views ----------------------------------------------------------
    @property
    def is_budget(self) -> bool:
        return self.kind == "budget"

    def as_polyhedral(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, b)``; a budget set is the single row ``e'xi >= N - J``."""
        if self.is_budget:
            return np.ones((1, self.node_count)), np.array([float(self.node_count - self.fail_budget)])
        return np.asarray(self.A, dtype=float), np.asarray(self.b, dtype=float)

    def describe(self) -> str:
        if self.is_budget:
            return f"Budget(J={self.fail_budget})"
        return f"Polyhedral({len(self.b)} rows)"

    def max_failures(self) -> int:
        """Largest number of zeros any member can have (upper bound for polyhedral sets)."""
        if self.is_budget:
            return min(self.fail_budget, self.node_count)
        return self.node_count


def group_budget(partition: GroupPartition, max_failures: int | Sequence[int]) -> UncertaintySet:
    """At most ``J_c`` failures inside every group: rows ``sum_{n in N_c} xi_n >= |N_c| - J_c``."""
    per_group = ([int(max_failures)] * partition.group_count
                 if isinstance(max_failures, int) else [int(j) for j in max_failures])
    if len(per_group) != partition.group_count:
        raise InputError(f"{len(per_group)} failure budgets for {partition.group_count} groups")
    rows, rhs = [], []
    for c, size in enumerate(partition.group_sizes):
        rows.append([1.0 if g == c else 0.0 for g in partition.group_of])
        rhs.append(float(size - per_group[c]))
    return UncertaintySet.polyhedral(rows, rhs)


def load_polyhedral(path: str | Path, node_count: int) -> UncertaintySet:
    """Read ``{"A": [[...]], "b": [...]}``; raises :class:`InputError` with location."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: cannot read uncertainty file ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        model = PolyhedralFile.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise InputError(f"{path}: {loc}: {first['msg']}") from exc
    u = UncertaintySet.polyhedral(model.A, model.b)
    if u.node_count != node_count:
        raise InputError(f"{path}: A has {u.node_count} columns, graph has {node_count} nodes")
    return u


# ────────────────────────────────────────────────────────────────────
# Membership and enumeration
# ────────────────────────────────────────────────────────────────────

def contains(u: UncertaintySet, xi: Scenario) -> bool:
    v = as_binary_vector(xi, u.node_count, "scenario")
    if u.is_budget:
        return int(u.node_count - v.sum()) <= u.fail_budget
    a, b = u.as_polyhedral()
    return bool(np.all(a @ v >= b - 1e-9))


def scenario_count(u: UncertaintySet, support: int | None = None) -> int:
    """Scenarios an enumeration over ``support`` failure positions would visit."""
    s = u.node_count if support is None else support
    if u.is_budget:
        return sum(math.comb(s, j) for j in range(min(u.fail_budget, s) + 1))
    return 2 ** s


def _scenarios_failing_within(u: UncertaintySet, positions: Sequence[int]) -> Iterator[Scenario]:
    n = u.node_count
    top = min(u.max_failures(), len(positions))
    for size in range(top + 1):
        hit = False
        for failed in itertools.combinations(positions, size):
            xi = [1] * n
            for p in failed:
                xi[p] = 0
            xi = tuple(xi)
            if u.is_budget or contains(u, xi):
                hit = True
                yield xi
        # Upward closed: no member with `size` failures means none with more.
        if not hit:
            return


def enumerate_scenarios(u: UncertaintySet, cap: int | None = None) -> Iterator[Scenario]:
    """Every member of ``Xi`` exactly once: by number of failures, then in
    ``itertools.combinations`` order of the failed positions."""
    cap = ENUM_CAP if cap is None else cap
    count = scenario_count(u)
    if count > cap:
        raise CapExceededError(f"scenario enumeration ({u.describe()}, N={u.node_count})", count, cap)
    return _scenarios_failing_within(u, range(u.node_count))


def effective_scenarios(u: UncertaintySet, support: Sequence[int], cap: int | None = None) -> Iterator[Scenario]:
    """Members of ``Xi`` whose failures all lie in ``support``.

    For an upward-closed set, anything that depends on ``xi`` only through
    the support (coverage by the selected monitors, labels) attains all of
    its values on these scenarios.
    """
    cap = ENUM_CAP if cap is None else cap
    positions = sorted(set(support))
    count = scenario_count(u, len(positions))
    if count > cap:
        raise CapExceededError(f"effective scenarios ({u.describe()}, support {len(positions)})", count, cap)
    return _scenarios_failing_within(u, positions)


# ────────────────────────────────────────────────────────────────────
# Labels
# ────────────────────────────────────────────────────────────────────

def all_labels(node_count: int, k: int) -> Iterator[LabelVector]:
    return itertools.product(range(node_count + 1), repeat=k)


def is_positive(label: LabelVector) -> bool:
    """``True`` for labels in L+ (no scheme feasible)."""
    return all(entry > 0 for entry in label)


def label_from_counts(counts: np.ndarray, schemes: np.ndarray) -> LabelVector:
    """Vectorised labelling given per-node cover counts and a K x N scheme matrix."""
    violated = schemes > (counts >= 1)[None, :]
    label = []
    for row in violated:
        hits = np.flatnonzero(row)
        label.append(int(hits[0]) + 1 if hits.size else 0)
    return tuple(label)


def _scheme_matrix(schemes, n: int) -> np.ndarray:
    rows = [as_binary_vector(y, n, f"scheme {k + 1}") for k, y in enumerate(schemes)]
    if not rows:
        raise InputError("at least one covering scheme is required")
    return np.vstack(rows)


def label_of(u: UncertaintySet, g: Graph, x, schemes, xi: Scenario) -> LabelVector:
    """Smallest violated node (1-based) per scheme, 0 when the scheme is feasible."""
    if not contains(u, xi):
        raise InputError(f"scenario {tuple(xi)} is not a member of {u.describe()}")
    return label_from_counts(cover_counts(g, x, xi), _scheme_matrix(schemes, g.node_count))


def _validate_label(label: LabelVector, n: int, k: int) -> None:
    if len(label) != k:
        raise InputError(f"label has {len(label)} entries for {k} schemes")
    if any(not 0 <= e <= n for e in label):
        raise InputError(f"label entries must lie in 0..{n}")


def cell_empty_integer(u: UncertaintySet, g: Graph, x, schemes, label: LabelVector,
                       cap: int | None = None) -> bool:
    """True iff no ``xi in Xi`` satisfies the inequalities selected by ``label``."""
    n = g.node_count
    ys = _scheme_matrix(schemes, n)
    _validate_label(label, n, ys.shape[0])
    xv = as_binary_vector(x, n, "monitor vector")
    for xi in effective_scenarios(u, np.flatnonzero(xv), cap):
        counts = cover_counts(g, xv, xi)
        ok = True
        for k, entry in enumerate(label):
            if entry > 0:
                ok = ys[k, entry - 1] >= counts[entry - 1] + 1
            else:
                ok = bool(np.all(ys[k] <= counts))
            if not ok:
                break
        if ok:
            return False
    return True


def cell_empty_relaxed(u: UncertaintySet, g: Graph, x, schemes, label: LabelVector) -> bool:
    """Phase-1 LP over ``xi in [0,1]^N ∩ T`` with the label's inequalities."""
    n = g.node_count
    ys = _scheme_matrix(schemes, n)
    _validate_label(label, n, ys.shape[0])
    xv = as_binary_vector(x, n, "monitor vector")
    lp = LpModel("cell_relaxed", maximize=False)
    cols = [lp.add_var(f"xi_{v}", 0.0, 1.0) for v in range(n)]
    a, b = u.as_polyhedral()
    for r in range(a.shape[0]):
        lp.add_row({cols[v]: a[r, v] for v in range(n) if a[r, v]}, Sense.GE, b[r], f"T_{r}")

    def cover_terms(node: int) -> dict[int, float]:
        return {cols[v]: 1.0 for v in g.in_neighbors[node] if xv[v]}

    for k, entry in enumerate(label):
        if entry > 0:
            node = entry - 1
            lp.add_row(cover_terms(node), Sense.LE, float(ys[k, node]) - 1.0, f"viol_{k}")
        else:
            for node in np.flatnonzero(ys[k]):
                lp.add_row(cover_terms(int(node)), Sense.GE, 1.0, f"feas_{k}_{node}")
    report = solve_lp(lp)
    if report.status is SolveStatus.INFEASIBLE:
        return True
    if report.status is SolveStatus.OPTIMAL:
        return False
    raise SolverFailure(f"relaxed cell check ended with status {report.status.value}: {report.message}")
