"""
evaluation/pof.py
=================
Price of group fairness: ``PoF = 1 - OPT_fair / OPT``.

* closed forms for SBM graphs (deterministic and under a failure budget),
  natural logarithms, asymptotic ``o(1)`` terms dropped;
* the extremal two-cluster graph family whose PoF tends to one;
* a Monte-Carlo estimate over sampled graphs that averages the optima
  first and takes the ratio of the means;
* the size-ratio curves (small community fixed, large one growing).
"""

from __future__ import annotations

import concurrent.futures as _cf
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from evaluation.sbm import SbmParams, generate_sbm, sample_seed
from solvers.exact_oracle import solve_rc
from solvers.fairness_search import FairnessConfig, max_feasible_w
from tools.errors import CoveringError, DomainError, SolverFailure
from tools.instance import CoveringInstance
from tools.netmodel import Graph, GroupPartition
from tools.uncertainty import UncertaintySet

logger = logging.getLogger(__name__)

MIN_ANALYTIC_SIZE = 16
MAX_FAILURE_SHARE = 0.10
BOOTSTRAP_ROUNDS = 1000

Sampler = Callable[[int], tuple[Graph, GroupPartition]]


# ────────────────────────────────────────────────────────────────────
# Closed forms
# ────────────────────────────────────────────────────────────────────

def d(size: float) -> float:
    """Community degree scale ``ln n / ln ln n``."""
    if size < MIN_ANALYTIC_SIZE:
        raise DomainError(f"community size {size} is below {MIN_ANALYTIC_SIZE}; ln ln n is too small")
    return math.log(size) / math.log(math.log(size))


def pof(opt: float, opt_fair: float) -> float:
    if opt <= 0:
        raise DomainError(f"PoF needs a positive unconstrained optimum, got {opt}")
    return 1.0 - opt_fair / opt


def analytic_pof_det(sizes: Sequence[float], monitors: Optional[int] = None) -> float:
    """PoF without failures; independent of the monitor count once o(1) is dropped."""
    sizes = sorted(float(s) for s in sizes)
    scales = [d(s) for s in sizes]
    d_big = scales[-1]
    return 1.0 - sum(sizes) / sum(s * d_big / dc for s, dc in zip(sizes, scales))


def analytic_pof_robust(sizes: Sequence[float], monitors: float, fail_budget: float) -> float:
    """PoF with ``fail_budget`` failures among ``monitors`` monitors (needs I > C J)."""
    sizes = sorted(float(s) for s in sizes)
    c = len(sizes)
    if monitors <= c * fail_budget:
        raise DomainError(f"I={monitors} must exceed C*J={c * fail_budget:g}")
    scales = [d(s) for s in sizes]
    d_big = scales[-1]
    eta = (monitors - c * fail_budget) / sum(s / dc for s, dc in zip(sizes, scales))
    spare = monitors - fail_budget
    return (1.0
            - eta * sum(sizes) / (spare * d_big)
            - fail_budget * sum(scales[:-1]) / (spare * d_big))


def pof_curves(small: int = 20, large: Optional[Sequence[int]] = None, monitors: int = 12,
               gammas: Sequence[float] = (0.0, 0.1, 0.2)) -> pd.DataFrame:
    """Analytic PoF over a grid of large-community sizes, one row per (size, gamma).

    ``J = gamma * I`` is kept real-valued.
    """
    if large is None:
        large = np.unique(np.geomspace(small, 10_000, 50).round()).astype(int)
    rows = []
    for n2 in large:
        sizes = [small, int(n2)]
        det = analytic_pof_det(sizes, monitors)
        for gamma in gammas:
            j = gamma * monitors
            rows.append({
                "n1": small, "n2": int(n2), "size_ratio": int(n2) / small,
                "gamma": gamma, "J": j, "I": monitors,
                "deterministic": det,
                "robust": analytic_pof_robust(sizes, monitors, j),
            })
    return pd.DataFrame(rows)


# ────────────────────────────────────────────────────────────────────
# Worst-case family
# ────────────────────────────────────────────────────────────────────

def gap_family_graph(node_count: int) -> tuple[Graph, GroupPartition]:
    """Four-node path ``0-1-2-3`` next to a clique on the other ``N-4`` nodes.

    Groups: ``{0, 2}``, ``{1}`` and ``{3}`` plus the clique.  With two
    monitors and no failures ``OPT = N-3`` while ``OPT_fair = 4``.
    """
    if node_count < 9:
        raise DomainError(f"the two-cluster family needs N >= 9, got {node_count}")
    edges = [(0, 1), (1, 2), (2, 3)]
    clique = range(4, node_count)
    edges += [(u, v) for u in clique for v in clique if u < v]
    groups = (0, 1, 0, 2) + (2,) * (node_count - 4)
    return Graph.from_edges(node_count, edges, symmetric=True), GroupPartition(groups)


# ────────────────────────────────────────────────────────────────────
# Monte-Carlo PoF
# ────────────────────────────────────────────────────────────────────

@dataclass
class PofReport:
    empirical: float
    mean_opt: float
    mean_fair: float
    samples: int
    failures: int
    monitors: int
    fail_budget: int
    ci_low: float = math.nan
    ci_high: float = math.nan
    analytic: Optional[float] = None
    opt_values: list[int] = field(default_factory=list)
    fair_values: list[int] = field(default_factory=list)
    w_values: list[float] = field(default_factory=list)
    d_values: list[float] = field(default_factory=list)
    eta: Optional[float] = None

    @property
    def gamma(self) -> float:
        return self.fail_budget / self.monitors

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"OPT": self.opt_values, "OPT_fair": self.fair_values, "W_star": self.w_values})


def _solve_sample(graph: Graph, partition: GroupPartition, monitors: int, fail_budget: int,
                  cfg: FairnessConfig) -> tuple[int, int, float]:
    instance = CoveringInstance(graph, partition, UncertaintySet.budget(graph.node_count, fail_budget), monitors)
    opt = solve_rc(instance).optimum
    if opt is None:
        raise SolverFailure("unconstrained optimum missing")
    fair = max_feasible_w(instance, cfg)
    return opt, int(fair.tau), fair.w_star


def _bootstrap(opt: np.ndarray, fair: np.ndarray, seed: int) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, opt.size, size=(BOOTSTRAP_ROUNDS, opt.size))
    means_opt = opt[idx].mean(axis=1)
    means_fair = fair[idx].mean(axis=1)
    stats = 1.0 - means_fair / np.where(means_opt > 0, means_opt, np.nan)
    low, high = np.nanpercentile(stats, [2.5, 97.5])
    return float(low), float(high)


def empirical_pof(source: Union[SbmParams, Sampler], monitors: int, fail_budget: int = 0,
                  samples: int = 20, cfg: FairnessConfig | None = None, seed: int = 0,
                  workers: int = 1) -> PofReport:
    """``1 - E[OPT_fair] / E[OPT]`` over ``samples`` graphs.

    ``source`` is either SBM parameters (one seeded draw per sample) or a
    callable mapping a sample index to a graph and its groups.
    """
    cfg = cfg or FairnessConfig(solver="oracle")
    if isinstance(source, SbmParams):
        params = source

        def sampler(i: int) -> tuple[Graph, GroupPartition]:
            return generate_sbm(params.model_copy(update={"seed": sample_seed(seed, i)}))
    else:
        params, sampler = None, source

    def one(i: int) -> tuple[int, int, float]:
        g, p = sampler(i)
        return _solve_sample(g, p, monitors, fail_budget, cfg)

    results: list[Optional[tuple[int, int, float]]] = [None] * samples
    failures = 0
    with _cf.ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {pool.submit(one, i): i for i in range(samples)}
        for fut in _cf.as_completed(futures):
            i = futures[fut]
            try:
                results[i] = fut.result()
            except CoveringError as exc:
                failures += 1
                logger.warning("[PoF] sample %d failed: %s", i, exc)
    if failures > MAX_FAILURE_SHARE * samples:
        raise SolverFailure(f"{failures} of {samples} samples failed (limit {MAX_FAILURE_SHARE:.0%})")

    done = [r for r in results if r is not None]
    if not done:
        raise SolverFailure("no sample produced a result")
    opt = np.array([r[0] for r in done], dtype=float)
    fair = np.array([r[1] for r in done], dtype=float)
    report = PofReport(
        empirical=pof(opt.mean(), fair.mean()),
        mean_opt=float(opt.mean()),
        mean_fair=float(fair.mean()),
        samples=len(done),
        failures=failures,
        monitors=monitors,
        fail_budget=fail_budget,
        opt_values=[r[0] for r in done],
        fair_values=[r[1] for r in done],
        w_values=[r[2] for r in done],
    )
    if len(done) > 1:
        report.ci_low, report.ci_high = _bootstrap(opt, fair, seed)
    if params is not None and min(params.sizes) >= MIN_ANALYTIC_SIZE:
        report.d_values = [d(s) for s in params.sizes]
        if monitors > len(params.sizes) * fail_budget:
            report.analytic = analytic_pof_robust(params.sizes, monitors, fail_budget)
            report.eta = (monitors - len(params.sizes) * fail_budget) / sum(
                s / dc for s, dc in zip(params.sizes, report.d_values))
    logger.info("[PoF] I=%d J=%d: empirical %.4f over %d samples (%d failed)",
                monitors, fail_budget, report.empirical, report.samples, failures)
    return report
