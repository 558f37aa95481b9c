"""
evaluation/run_experiment.py
============================
Batch fairness-gap experiment on seeded two-community SBM graphs.

For every seed the runner draws one graph, places ``I = N/3`` monitors with
the robust greedy heuristic and with the fair (auto-W) solver, and logs the
worst-off group's worst-case coverage of both together with the PoF of the
fair solution relative to the exact unconstrained optimum.  One CSV row per
instance, rewritten after every run.

Usage examples
--------------
    # Desk-scale default: sizes 4+8, J=1, ten seeds, exact oracle
    python -m evaluation.run_experiment

    # Larger graphs with the Benders solver
    python -m evaluation.run_experiment --sizes 12 24 --solver benders --K 2

    # Only three seeds starting at 100
    python -m evaluation.run_experiment --seeds 3 --first-seed 100
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from datetime import datetime
from pathlib import Path

from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

load_dotenv(PROJECT_ROOT / ".env")

from config.settings import get_run_metadata
from evaluation.metrics import reference_coverage, run_method
from evaluation.sbm import SbmParams, generate_sbm
from solvers.fairness_search import FairnessConfig
from tools.errors import CoveringError
from tools.instance import CoveringInstance
from tools.uncertainty import UncertaintySet


# ──────────────────────────────────────────────────────────────
# Single experiment run
# ──────────────────────────────────────────────────────────────

def run_single(params: SbmParams, fail_budget: int, cfg: FairnessConfig,
               monitors: int | None = None) -> dict:
    """Draw one graph, solve it both ways, return one CSV row."""
    graph, partition = generate_sbm(params)
    n = graph.node_count
    budget = monitors or max(1, n // 3)
    instance = CoveringInstance(graph, partition, UncertaintySet.budget(n, fail_budget), budget)

    t0 = time.perf_counter()
    greedy = run_method(instance, "greedy")
    fair = run_method(instance, cfg.solver, cfg.k, cfg)
    reference, kind = reference_coverage(instance, {"greedy": greedy})
    elapsed = time.perf_counter() - t0

    return {
        "seed": params.seed,
        "sizes": ",".join(map(str, params.sizes)),
        "N": n,
        "I": budget,
        "J": fail_budget,
        "solver": cfg.solver,
        "K": cfg.k,
        "edges": len(graph.edges),
        "W_star": fair.w_star,
        "fair_worst_total": fair.report.worst_total,
        "fair_min_group_fraction": round(fair.report.worst_group_fraction, 6),
        "greedy_worst_total": greedy.report.worst_total,
        "greedy_min_group_fraction": round(greedy.report.worst_group_fraction, 6),
        "reference": kind,
        "reference_coverage": reference,
        "pof": round(1.0 - fair.report.worst_total / reference, 6) if reference else None,
        "fair_at_least_greedy": fair.report.worst_group_fraction >= greedy.report.worst_group_fraction - 1e-12,
        "seconds": round(elapsed, 3),
        "success": True,
    }


# ──────────────────────────────────────────────────────────────
# Batch runner
# ──────────────────────────────────────────────────────────────

def run_all(sizes: list[int], seeds: list[int], fail_budget: int = 1, cfg: FairnessConfig | None = None,
            a: float = 3.0, b: float = 1.0, log_path: str | None = None) -> list[dict]:
    """Run one instance per seed and keep the CSV log current."""
    cfg = cfg or FairnessConfig(solver="oracle")
    if log_path is None:
        log_dir = "data/experiments"
        os.makedirs(log_dir, exist_ok=True)
        log_path = os.path.join(log_dir, f"experiment_log_{datetime.now().strftime('%Y%m%d_%H%M%S')}.csv")

    rows: list[dict] = []
    metadata = get_run_metadata()
    for current, seed in enumerate(seeds, start=1):
        print(f"\n{'─' * 60}")
        print(f" EXPERIMENT {current}/{len(seeds)}  |  sizes {sizes}  |  seed {seed}")
        print(f"{'─' * 60}")
        params = SbmParams(sizes=sizes, a=a, b=b, seed=seed)
        try:
            row = run_single(params, fail_budget, cfg)
            print(f"  [Fair]   W*={row['W_star']}  min group {row['fair_min_group_fraction']:.3f}")
            print(f"  [Greedy] min group {row['greedy_min_group_fraction']:.3f}")
            print(f"  [PoF]    {row['pof']} ({row['reference']} reference)")
        except CoveringError as exc:
            row = {"seed": seed, "sizes": ",".join(map(str, sizes)), "J": fail_budget,
                   "solver": cfg.solver, "success": False, "error": str(exc)}
            print(f"  [ERROR] {exc}")
        row.update(metadata)
        rows.append(row)
        _write_csv(log_path, rows)

    print(f"\n[DONE] All experiments complete.  Log -> {log_path}")
    return rows


def _write_csv(path: str, rows: list[dict]) -> None:
    """Write list-of-dicts to CSV (overwrites each time, crash-safe)."""
    if not rows:
        return
    keys = sorted(set().union(*(r.keys() for r in rows)))
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=keys, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            safe = {k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in row.items()}
            w.writerow(safe)


# ──────────────────────────────────────────────────────────────
# CLI
# ──────────────────────────────────────────────────────────────

def main():
    parser = argparse.ArgumentParser(
        description="Fairness-gap experiment on seeded SBM graphs.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--sizes", nargs="+", type=int, default=[4, 8],
                        help="Community sizes, nondecreasing (default: 4 8).")
    parser.add_argument("--seeds", type=int, default=10, help="Number of instances (default: 10).")
    parser.add_argument("--first-seed", type=int, default=0, dest="first_seed")
    parser.add_argument("--fail-budget", type=int, default=1, dest="fail_budget", help="J (default: 1).")
    parser.add_argument("--solver", choices=["oracle", "monolithic", "benders"], default="oracle")
    parser.add_argument("--K", type=int, default=1, dest="k")
    parser.add_argument("--a", type=float, default=3.0, help="Within-community coefficient.")
    parser.add_argument("--b", type=float, default=1.0, help="Between-community coefficient.")
    parser.add_argument("--output", type=str, default=None, help="CSV log path.")
    args = parser.parse_args()

    run_all(
        sizes=args.sizes,
        seeds=list(range(args.first_seed, args.first_seed + args.seeds)),
        fail_budget=args.fail_budget,
        cfg=FairnessConfig(solver=args.solver, k=args.k),
        a=args.a,
        b=args.b,
        log_path=args.output,
    )


if __name__ == "__main__":
    main()
