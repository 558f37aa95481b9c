"""
evaluation/analyze_results.py
==============================
Load fairness-gap experiment logs and print grouped summary tables.

Usage:
    python -m evaluation.analyze_results data/experiments/experiment_log_*.csv
"""

from __future__ import annotations

import argparse
import glob
import sys
from pathlib import Path

import pandas as pd

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

GROUP_COLS = ["sizes", "J", "solver"]


def load_logs(paths: list[str]) -> pd.DataFrame:
    """Read one or more experiment CSV logs into a single DataFrame."""
    frames = [pd.read_csv(f) for p in paths for f in sorted(glob.glob(p))]
    if not frames:
        raise FileNotFoundError(f"no log files match {paths}")
    return pd.concat(frames, ignore_index=True)


def summarise(df: pd.DataFrame) -> pd.DataFrame:
    """Per (sizes, J, solver): success rate, fairness gain over greedy, PoF."""
    df = df.copy()
    df["_success"] = df["success"].astype(float)
    ok = df[df["success"].astype(bool)].copy()
    ok["gain"] = ok["fair_min_group_fraction"] - ok["greedy_min_group_fraction"]
    ok["_fair_wins"] = ok["fair_at_least_greedy"].astype(float)

    runs = df.groupby(GROUP_COLS, dropna=False).agg(runs=("_success", "count"), success_rate=("_success", "mean"))
    table = ok.groupby(GROUP_COLS, dropna=False).agg(
        W_star_mean=("W_star", "mean"),
        fair_min_group_mean=("fair_min_group_fraction", "mean"),
        greedy_min_group_mean=("greedy_min_group_fraction", "mean"),
        gain_mean=("gain", "mean"),
        gain_min=("gain", "min"),
        fair_at_least_greedy=("_fair_wins", "mean"),
        pof_mean=("pof", "mean"),
        pof_max=("pof", "max"),
        seconds_mean=("seconds", "mean"),
    )
    return runs.join(table).round(4)


def main():
    parser = argparse.ArgumentParser(description="Analyse experiment logs and print summary tables.")
    parser.add_argument("logs", nargs="+", help="Path(s) or glob(s) to experiment_log_*.csv files.")
    args = parser.parse_args()

    try:
        df = load_logs(args.logs)
    except FileNotFoundError as exc:
        print(f"[ERROR] {exc}")
        sys.exit(1)
    print(f"Loaded {len(df)} experiment rows from {len(args.logs)} path(s).")
    print("\n" + "=" * 70)
    print(" FAIRNESS-GAP SUMMARY")
    print("=" * 70)
    print(summarise(df).to_string())
    print("\n" + "=" * 70)


if __name__ == "__main__":
    main()
