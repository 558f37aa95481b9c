from __future__ import annotations

import math

import numpy as np
import pytest

from evaluation.pof import (
    analytic_pof_det,
    analytic_pof_robust,
    d,
    empirical_pof,
    gap_family_graph,
    pof,
    pof_curves,
)
from evaluation.sbm import SbmParams
from solvers.exact_oracle import solve_rc
from solvers.fairness_search import FairnessConfig, max_feasible_w
from tools.errors import DomainError, InputError, SolverFailure
from tools.instance import CoveringInstance
from tools.uncertainty import UncertaintySet


def _gap_instance(n: int) -> CoveringInstance:
    graph, partition = gap_family_graph(n)
    return CoveringInstance(graph, partition, UncertaintySet.budget(n, 0), 2)


# ────────────────────────────────────────────────────────────────────
# Closed forms
# ────────────────────────────────────────────────────────────────────

def test_degree_scale():
    assert d(16) == pytest.approx(math.log(16) / math.log(math.log(16)))
    with pytest.raises(DomainError):
        d(15)


def test_pof_ratio():
    assert pof(8, 4) == 0.5
    assert pof(5, 5) == 0.0
    with pytest.raises(DomainError):
        pof(0, 0)


def test_equal_communities_cost_nothing():
    assert analytic_pof_det([20, 20]) == pytest.approx(0.0, abs=1e-12)
    assert analytic_pof_robust([20, 20], 12, 1.2) == pytest.approx(0.0, abs=1e-12)
    assert analytic_pof_det([50]) == pytest.approx(0.0, abs=1e-12)
    assert analytic_pof_robust([50], 12, 1) == pytest.approx(0.0, abs=1e-12)


def test_unbalanced_communities():
    assert analytic_pof_det([20, 10_000]) == pytest.approx(1.035e-3, rel=1e-2)
    assert analytic_pof_det([10_000, 20]) == analytic_pof_det([20, 10_000])


def test_robust_reduces_to_deterministic_without_failures():
    for sizes in ([20, 100], [20, 500, 3000]):
        assert analytic_pof_robust(sizes, 12, 0) == pytest.approx(analytic_pof_det(sizes))


def test_robust_needs_spare_monitors():
    with pytest.raises(DomainError):
        analytic_pof_robust([20, 40], 2, 1)
    with pytest.raises(DomainError):
        analytic_pof_det([10, 40])


def test_curves_shape():
    frame = pof_curves()
    grid = np.unique(np.geomspace(20, 10_000, 50).round())
    assert len(frame) == 3 * grid.size
    assert list(frame.columns) == ["n1", "n2", "size_ratio", "gamma", "J", "I", "deterministic", "robust"]

    det = frame[frame["gamma"] == 0.0]["deterministic"].to_numpy()
    signs = np.sign(np.diff(det))
    signs = signs[signs != 0]
    assert signs[0] > 0
    assert np.count_nonzero(np.diff(signs)) == 1

    for gamma in (0.1, 0.2):
        part = frame[frame["gamma"] == gamma]
        robust = part["robust"].to_numpy()
        assert np.all(np.diff(robust) >= -1e-12)
        assert np.all(robust >= part["deterministic"].to_numpy() - 1e-12)
        assert part["J"].iloc[0] == pytest.approx(12 * gamma)


# ────────────────────────────────────────────────────────────────────
# Two-cluster family
# ────────────────────────────────────────────────────────────────────

def test_gap_family_structure():
    graph, partition = gap_family_graph(9)
    assert graph.out_neighbors[1] == (0, 2)
    assert graph.out_neighbors[3] == (2,)
    assert graph.out_neighbors[4] == (5, 6, 7, 8)
    assert partition.group_sizes == (2, 1, 6)
    with pytest.raises(DomainError):
        gap_family_graph(8)


@pytest.mark.parametrize("n,w_star,expected", [(9, 0.16, 1 / 3), (11, 0.12, 1 / 2), (19, 0.04, 3 / 4)])
def test_gap_family_price(n, w_star, expected):
    inst = _gap_instance(n)
    opt = solve_rc(inst).optimum
    fair = max_feasible_w(inst, FairnessConfig(solver="oracle"))
    assert opt == n - 3
    assert fair.tau == 4
    assert fair.w_star == w_star
    assert pof(opt, fair.tau) == pytest.approx(expected)


# ────────────────────────────────────────────────────────────────────
# Monte Carlo
# ────────────────────────────────────────────────────────────────────

def test_equal_cliques_have_no_price():
    report = empirical_pof(SbmParams(sizes=[4, 4], a=10.0, b=0.0), monitors=2, samples=3)
    assert report.empirical == 0.0
    assert report.opt_values == [6, 6, 6]
    assert report.w_values == [0.72, 0.72, 0.72]
    assert (report.ci_low, report.ci_high) == (0.0, 0.0)
    assert report.analytic is None


@pytest.mark.parametrize("workers", [1, 2])
def test_sampler_callable(workers):
    report = empirical_pof(lambda i: gap_family_graph(11), monitors=2, samples=2, workers=workers)
    assert report.empirical == pytest.approx(0.5)
    assert (report.mean_opt, report.mean_fair) == (8.0, 4.0)
    assert report.gamma == 0.0
    assert report.to_frame()["OPT_fair"].tolist() == [4, 4]


def test_too_many_failed_samples():
    def sampler(i):
        if i == 0:
            raise InputError("broken sample")
        return gap_family_graph(9)

    with pytest.raises(SolverFailure, match="1 of 2"):
        empirical_pof(sampler, monitors=2, samples=2)


def test_small_sbm_run():
    report = empirical_pof(SbmParams(sizes=[4, 8], a=3.0, b=1.0), monitors=4, fail_budget=1,
                           samples=3, seed=5)
    assert report.samples == 3 and report.failures == 0
    assert 0.0 <= report.empirical <= 1.0
    assert report.ci_low <= report.ci_high
    assert all(f <= o for f, o in zip(report.fair_values, report.opt_values))


def test_analytic_attached_for_large_communities():
    report = empirical_pof(SbmParams(sizes=[16, 16], a=20.0, b=0.0), monitors=2, samples=1,
                           cfg=FairnessConfig(solver="oracle", step=0.25))
    assert report.analytic == pytest.approx(0.0, abs=1e-12)
    assert report.d_values == [d(16), d(16)]
    assert report.eta == pytest.approx(2 / (32 / d(16)))
