"""
main.py – Entry-point for the robust fair covering suite.

Usage:
    # Fair K-adaptability solve, largest feasible W found automatically
    python main.py solve data/fixtures/star.json --K 2 --monitors 2 --fail-budget 1 --auto-w

    # Fixed floor level, monolithic model, result JSON without timings
    python main.py solve data/fixtures/path.json --monitors 2 --W 0.5 --solver monolithic \
        --output result.json --no-timings

    # Exact optimum by enumeration
    python main.py oracle data/fixtures/two_cliques.json --monitors 2 --W 0.48

    # Worst-case table of a given monitor set (external node ids)
    python main.py evaluate data/fixtures/star.json --x 0,1 --fail-budget 1

    # Price-of-fairness curves / worst-case family / SBM Monte Carlo
    python main.py pof curves --output curves.csv
    python main.py pof gap --N 9 11 19
    python main.py pof sbm --sizes 6,6 --samples 10 --monitors 2

    # SBM instance generation
    python main.py generate sbm --sizes 20,40 --seed 7 --output g.json

    # Fair solver against the baselines
    python main.py compare data/fixtures/path.json --monitors 2 --solvers benders,greedy,dc

Exit codes: 0 solved, 1 bad input, 2 infeasible, 3 cap / time / iteration limit.
"""

import argparse
import logging
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Literal, Optional

from dotenv import load_dotenv

load_dotenv()

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.settings import LOG_LEVEL, get_run_metadata
from config.schemas import GroupRow, ResultRecord, result_to_json
from tools.errors import (
    BigMAuditError,
    CapExceededError,
    CoveringError,
    DomainError,
    InfeasibleError,
    InputError,
    SolverFailure,
)

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3

FAIR_SOLVERS = ("benders", "monolithic", "oracle")
SOLVERS = FAIR_SOLVERS + ("greedy", "dc")

_STATUS_EXIT = {
    "optimal": EXIT_OK,
    "infeasible": EXIT_INFEASIBLE,
    "time_limit": EXIT_LIMIT,
    "cap_hit": EXIT_LIMIT,
    "iteration_limit": EXIT_LIMIT,
}


class RunConfig(BaseModel):
    """Validated options of one CLI run."""
    model_config = ConfigDict(extra="forbid")

    command: Literal["solve", "oracle", "evaluate", "pof", "generate", "compare"]
    graph: Optional[str] = None
    uncertainty: Optional[str] = None
    monitors: int = Field(default=1, ge=1)
    fail_budget: int = Field(default=0, ge=0)
    k: int = Field(default=1, ge=1)
    w: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    auto_w: bool = False
    solver: Literal["benders", "monolithic", "oracle", "greedy", "dc"] = "benders"
    seed: int = 0
    time_limit: Optional[float] = Field(default=None, gt=0)
    output: Optional[str] = None
    log: Optional[str] = None
    timings: bool = True
    symmetrize: bool = False
    symmetry: bool = True

    @model_validator(mode="after")
    def _one_w_mode(self) -> "RunConfig":
        if self.auto_w and self.w is not None:
            raise ValueError("give either --W or --auto-w, not both")
        if self.solver not in FAIR_SOLVERS and (self.auto_w or (self.w or 0) > 0):
            raise ValueError(f"solver {self.solver!r} ignores fairness floors; drop --W/--auto-w")
        return self

    @property
    def w_value(self) -> float:
        return 0.0 if self.w is None else self.w


# ────────────────────────────────────────────────────────────────────
# Argument parsing
# ────────────────────────────────────────────────────────────────────

def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", help="Graph JSON file.")
    p.add_argument("--uncertainty", default=None,
                   help="Polyhedral availability set JSON ({\"A\", \"b\"}); overrides --fail-budget.")
    p.add_argument("--monitors", "-I", type=int, default=1, help="Monitor budget I.")
    p.add_argument("--fail-budget", "-J", type=int, default=0, dest="fail_budget",
                   help="At most J monitors fail.")
    p.add_argument("--symmetrize", action="store_true", help="Add the reverse of every edge.")


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def parse_args(argv=None):
    parser = _Parser(
        description="Robust graph covering with maximin group fairness.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--log-level", default=LOG_LEVEL, dest="log_level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Choose monitors with a fair or baseline solver.")
    _instance_args(p)
    p.add_argument("--K", type=int, default=1, dest="k", help="Number of covering schemes.")
    w_mode = p.add_mutually_exclusive_group()
    w_mode.add_argument("--W", type=float, default=None, dest="w", help="Fairness floor level in [0, 1].")
    w_mode.add_argument("--auto-w", action="store_true", dest="auto_w",
                        help="Search the largest feasible W on the grid.")
    p.add_argument("--solver", choices=SOLVERS, default="benders")
    p.add_argument("--time-limit", type=float, default=None, dest="time_limit")
    p.add_argument("--no-symmetry", action="store_false", dest="symmetry",
                   help="Drop the scheme-ordering constraints.")
    p.add_argument("--output", "-o", default=None, help="Result JSON path (stdout when omitted).")
    p.add_argument("--log", default=None, help="JSONL iteration trace (benders).")
    p.add_argument("--no-timings", action="store_false", dest="timings",
                   help="Omit wall-clock fields so identical runs give identical files.")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("oracle", help="Exact optimum by enumeration (tiny instances).")
    _instance_args(p)
    p.add_argument("--W", type=float, default=None, dest="w")
    p.add_argument("--K", type=int, default=None, dest="k",
                   help="Exact K-adaptability value instead of the two-stage optimum.")
    p.add_argument("--exhaustive", action="store_true", help="Also scan monitor sets smaller than I.")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--no-timings", action="store_false", dest="timings")

    p = sub.add_parser("evaluate", help="Worst-case coverage table of a monitor set.")
    _instance_args(p)
    p.add_argument("--x", required=True, dest="x_nodes", help="Comma-separated monitor node ids.")
    p.add_argument("--output", "-o", default=None, help="Result JSON path.")
    p.add_argument("--csv", default=None, help="Per-group table as CSV.")
    p.add_argument("--no-timings", action="store_false", dest="timings")

    p = sub.add_parser("pof", help="Price-of-fairness studies.")
    p.add_argument("mode", choices=["curves", "gap", "sbm"])
    p.add_argument("--small", type=int, default=20, help="Fixed small community size (curves).")
    p.add_argument("--gammas", default="0,0.1,0.2", help="J/I values (curves).")
    p.add_argument("--N", type=int, nargs="+", default=[9, 11, 19], dest="sizes_n",
                   help="Node counts (gap).")
    p.add_argument("--sizes", default="6,6", help="Community sizes (sbm).")
    p.add_argument("--a", type=float, default=3.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--monitors", "-I", type=int, default=None)
    p.add_argument("--fail-budget", "-J", type=int, default=0, dest="fail_budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None, help="CSV path (stdout when omitted).")

    p = sub.add_parser("generate", help="Write a generated graph JSON file.")
    p.add_argument("kind", choices=["sbm", "gap"])
    p.add_argument("--sizes", default="20,40")
    p.add_argument("--a", type=float, default=3.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--N", type=int, default=11, dest="n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("compare", help="Fair solver against the greedy and degree baselines.")
    _instance_args(p)
    p.add_argument("--solvers", default="benders,greedy,dc")
    p.add_argument("--table", choices=["comparison", "discrimination"], default="comparison")
    p.add_argument("--K", type=int, default=1, dest="k")
    p.add_argument("--time-limit", type=float, default=None, dest="time_limit")
    p.add_argument("--output", "-o", default=None, help="CSV path (stdout when omitted).")
    return parser.parse_args(argv)


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"{what}: expected comma-separated integers, got {text!r}") from exc


# ────────────────────────────────────────────────────────────────────
# Shared pieces
# ────────────────────────────────────────────────────────────────────

def _load_instance(graph_path: str, uncertainty: Optional[str], monitors: int, fail_budget: int,
                   symmetrize: bool = False):
    from tools.instance import CoveringInstance
    from tools.netmodel import load_graph
    from tools.uncertainty import UncertaintySet, load_polyhedral

    graph, partition = load_graph(graph_path, symmetrize=symmetrize)
    if uncertainty:
        u = load_polyhedral(uncertainty, graph.node_count)
    else:
        u = UncertaintySet.budget(graph.node_count, fail_budget)
    return CoveringInstance(graph, partition, u, monitors)


def _instance_from_args(args):
    return _load_instance(args.graph, args.uncertainty, args.monitors, args.fail_budget, args.symmetrize)


def _group_rows(report) -> list[GroupRow]:
    return [
        GroupRow(group=c, size=size, worst_case_covered=cov, worst_case_percent=pct,
                 minimizing_scenario=list(xi))
        for c, (size, cov, pct, xi) in enumerate(zip(report.group_sizes, report.worst_by_group,
                                                     report.group_percents, report.scenario_by_group))
    ]


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text, encoding="utf-8")
        print(f"  [saved] {output}")
    else:
        sys.stdout.write(text)


def _emit_frame(frame: pd.DataFrame, output: Optional[str]) -> None:
    _emit(frame.to_csv(index=False, float_format="%.6g"), output)


def _banner(title: str) -> None:
    print(f"\n  {'=' * 64}", file=sys.stderr)
    print(f"  {title:^64}", file=sys.stderr)
    print(f"  {'Run: ' + datetime.now().strftime('%Y%m%d_%H%M%S'):^64}", file=sys.stderr)
    print(f"  {'=' * 64}\n", file=sys.stderr)


def _timing_table(stage_times: dict[str, float]) -> None:
    elapsed = sum(stage_times.values())
    print(f"\n  {'Stage':<38} {'Time':>8}  Progress", file=sys.stderr)
    print(f"  {'-' * 62}", file=sys.stderr)
    for name, seconds in stage_times.items():
        bar_len = min(10, int(seconds / max(elapsed, 1e-9) * 10))
        bar = "#" * bar_len + "." * (10 - bar_len)
        print(f"  {name:<38} {seconds:>7.2f}s  [{bar}]", file=sys.stderr)
    print(f"  {'=' * 64}\n", file=sys.stderr)


class _Stages:
    """Wall-clock per named stage, in insertion order."""

    def __init__(self):
        self.times: dict[str, float] = {}
        self._t = time.perf_counter()

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.times[name] = self.times.get(name, 0.0) + now - self._t
        self._t = now


# ────────────────────────────────────────────────────────────────────
# Commands
# ────────────────────────────────────────────────────────────────────

def cmd_solve(cfg: RunConfig) -> int:
    from graph.workflow import run_benders
    from solvers.baselines import degree_centrality, evaluate_worst_case, greedy_robust
    from solvers.exact_oracle import solve_rc_fair
    from solvers.fairness_search import FairnessConfig, max_feasible_w
    from solvers.kadapt_model import solve_full

    _banner("ROBUST FAIR COVERING: SOLVE")
    stages = _Stages()
    instance = _load_instance(cfg.graph, cfg.uncertainty, cfg.monitors, cfg.fail_budget, cfg.symmetrize)
    stages.lap("load instance")
    print(f"  Instance : N={instance.node_count}  C={instance.partition.group_count}  "
          f"I={instance.budget}  {instance.uncertainty.describe()}", file=sys.stderr)

    status, x, schemes, tau, iterations = "optimal", None, [], None, []
    w = cfg.w_value
    if cfg.auto_w:
        res = max_feasible_w(instance, FairnessConfig(solver=cfg.solver, k=cfg.k, time_limit=cfg.time_limit))
        w, x, tau = res.w_star, res.best.x, res.tau
        schemes = [list(s.y) for s in (res.best.schemes or [])]
        status = res.best.status
        print(f"  [FairSearch] W*={w:g} after {len(res.solves)} solve(s)", file=sys.stderr)
    else:
        inst = instance.with_fairness(w)
        if cfg.solver == "benders":
            res = run_benders(inst, cfg.k, symmetry=cfg.symmetry, time_limit=cfg.time_limit, trace_path=cfg.log)
            status, iterations = res.status, res.iterations
            best = res.solution or res.incumbent
            if best is not None:
                x, tau, schemes = best.x, best.tau, [list(s.y) for s in best.schemes]
        elif cfg.solver == "monolithic":
            res = solve_full(inst, cfg.k, symmetry=cfg.symmetry, time_limit=cfg.time_limit)
            status = res.status.value
            if res.solution is not None:
                x, tau = res.solution.x, res.solution.tau
                schemes = [list(s.y) for s in res.solution.schemes]
        elif cfg.solver == "oracle":
            res = solve_rc_fair(inst)
            status = "optimal" if res.feasible else "infeasible"
            x, tau = res.x, res.optimum
        elif cfg.solver == "greedy":
            x = greedy_robust(inst)
        else:
            x = degree_centrality(inst)
    stages.lap("solve")

    record = ResultRecord(command="solve", solver=cfg.solver, status=status, node_count=instance.node_count,
                          monitors=instance.budget, fail_budget=instance.uncertainty.max_failures(),
                          K=cfg.k, W=w, schemes=schemes, iterations=iterations, settings=get_run_metadata())
    if x is not None:
        report = evaluate_worst_case(instance.graph, instance.partition, x, instance.uncertainty)
        floors = instance.partition.floors(w)
        if cfg.solver in FAIR_SOLVERS and not report.meets_floors(floors):
            raise SolverFailure(f"emitted solution misses floors {floors}: {report.worst_by_group}")
        if tau is None:
            tau = report.worst_total
        record.x = list(x.x)
        record.tau = tau
        record.worst_case_total = report.worst_total
        record.worst_case_total_percent = report.total_percent
        record.groups = _group_rows(report)
    stages.lap("validate")

    record.timings = dict(stages.times)
    _emit(result_to_json(record, timings=cfg.timings), cfg.output)
    stages.lap("write")

    print(f"\n  Status   : {status}", file=sys.stderr)
    print(f"  tau      : {tau}", file=sys.stderr)
    if record.groups:
        print(f"  Groups   : " + "  ".join(f"{g.group}:{g.worst_case_percent}%" for g in record.groups),
              file=sys.stderr)
    _timing_table(stages.times)
    if status == "optimal" and x is None:
        return EXIT_INFEASIBLE
    return _STATUS_EXIT.get(status, EXIT_LIMIT)


def cmd_oracle(args) -> int:
    from solvers.baselines import evaluate_worst_case
    from solvers.exact_oracle import solve_kadapt_bruteforce, solve_rc, solve_rc_fair

    _banner("ROBUST FAIR COVERING: ORACLE")
    stages = _Stages()
    instance = _instance_from_args(args)
    stages.lap("load instance")
    if args.k is not None:
        res = solve_kadapt_bruteforce(instance.with_fairness(args.w or 0.0), args.k)
        solver = f"oracle-K{args.k}"
    elif args.w is None:
        res = solve_rc(instance, exhaustive=args.exhaustive)
        solver = "oracle-rc"
    else:
        res = solve_rc_fair(instance, args.w, exhaustive=args.exhaustive)
        solver = "oracle-rc-fair"
    stages.lap("enumerate")
    record = ResultRecord(command="oracle", solver=solver, status="optimal" if res.feasible else "infeasible",
                          node_count=instance.node_count, monitors=instance.budget,
                          fail_budget=instance.uncertainty.max_failures(), K=args.k or 1, W=args.w,
                          tau=res.optimum, schemes=[list(s.y) for s in res.schemes],
                          settings=get_run_metadata())
    if res.x is not None:
        report = evaluate_worst_case(instance.graph, instance.partition, res.x, instance.uncertainty)
        record.x = list(res.x.x)
        record.worst_case_total = report.worst_total
        record.worst_case_total_percent = report.total_percent
        record.groups = _group_rows(report)
    stages.lap("validate")
    record.timings = dict(stages.times)
    _emit(result_to_json(record, timings=args.timings), args.output)
    print(f"  Optimum  : {res.optimum}  ({res.subsets_scanned} monitor sets)", file=sys.stderr)
    _timing_table(stages.times)
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_evaluate(args) -> int:
    from solvers.baselines import evaluate_worst_case
    from tools.netmodel import MonitorSet

    instance = _instance_from_args(args)
    labels = list(instance.graph.labels)
    nodes = []
    for ext in _int_list(args.x_nodes, "--x"):
        if ext not in labels:
            raise InputError(f"--x: node id {ext} is not in {args.graph}")
        nodes.append(labels.index(ext))
    x = MonitorSet.from_nodes(instance.node_count, nodes)
    t0 = time.perf_counter()
    report = evaluate_worst_case(instance.graph, instance.partition, x, instance.uncertainty)
    record = ResultRecord(command="evaluate", solver="given", status="optimal", node_count=instance.node_count,
                          monitors=len(nodes), fail_budget=instance.uncertainty.max_failures(),
                          x=list(x.x), tau=report.worst_total, worst_case_total=report.worst_total,
                          worst_case_total_percent=report.total_percent, groups=_group_rows(report),
                          timings={"evaluate": time.perf_counter() - t0}, settings=get_run_metadata())
    if args.csv:
        report.to_frame().to_csv(args.csv, index=False)
    _emit(result_to_json(record, timings=args.timings), args.output)
    return EXIT_OK


def cmd_pof(args) -> int:
    from evaluation.pof import empirical_pof, gap_family_graph, pof, pof_curves
    from evaluation.sbm import SbmParams
    from solvers.exact_oracle import solve_rc
    from solvers.fairness_search import FairnessConfig, max_feasible_w
    from tools.instance import CoveringInstance
    from tools.uncertainty import UncertaintySet

    if args.mode == "curves":
        gammas = [float(t) for t in args.gammas.split(",")]
        frame = pof_curves(small=args.small, monitors=args.monitors or 12, gammas=gammas)
    elif args.mode == "gap":
        rows = []
        for n in args.sizes_n:
            g, p = gap_family_graph(n)
            inst = CoveringInstance(g, p, UncertaintySet.budget(n, args.fail_budget), args.monitors or 2)
            opt = solve_rc(inst).optimum
            fair = max_feasible_w(inst, FairnessConfig(solver="oracle"))
            rows.append({"N": n, "OPT": opt, "OPT_fair": fair.tau, "W_star": fair.w_star,
                         "pof": pof(opt, fair.tau), "closed_form": 1 - 4 / (n - 3)})
        frame = pd.DataFrame(rows)
    else:
        sizes = _int_list(args.sizes, "--sizes")
        params = SbmParams(sizes=sizes, a=args.a, b=args.b, seed=args.seed)
        monitors = args.monitors or max(1, sum(sizes) // 3)
        rep = empirical_pof(params, monitors, args.fail_budget, samples=args.samples,
                            seed=args.seed, workers=args.workers)
        frame = pd.DataFrame([{
            "sizes": args.sizes, "size_ratio": sizes[-1] / sizes[0], "I": monitors, "J": args.fail_budget,
            "gamma": rep.gamma, "samples": rep.samples, "failures": rep.failures,
            "mean_opt": rep.mean_opt, "mean_fair": rep.mean_fair, "empirical": rep.empirical,
            "ci_low": rep.ci_low, "ci_high": rep.ci_high, "analytic": rep.analytic,
        }])
    _emit_frame(frame, args.output)
    return EXIT_OK


def cmd_generate(args) -> int:
    from evaluation.pof import gap_family_graph
    from evaluation.sbm import SbmParams, generate_sbm
    from tools.netmodel import dump_graph

    if args.kind == "sbm":
        g, p = generate_sbm(SbmParams(sizes=_int_list(args.sizes, "--sizes"), a=args.a, b=args.b, seed=args.seed))
    else:
        g, p = gap_family_graph(args.n)
    _emit(dump_graph(g, p), args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    from evaluation.metrics import compare_methods, print_table
    from solvers.fairness_search import FairnessConfig

    methods = [m.strip() for m in args.solvers.split(",") if m.strip()]
    unknown = [m for m in methods if m not in SOLVERS]
    if unknown:
        raise InputError(f"--solvers: unknown {unknown}; expected a subset of {list(SOLVERS)}")
    instance = _instance_from_args(args)
    frame = compare_methods(instance, methods, k=args.k, cfg=FairnessConfig(time_limit=args.time_limit),
                            table=args.table)
    if args.output:
        print_table(frame, args.table.upper())
    _emit_frame(frame, args.output)
    return EXIT_OK


def run(args) -> int:
    """Dispatch one parsed command; exceptions become exit codes."""
    try:
        if args.command == "solve":
            cfg = RunConfig(command="solve", graph=args.graph, uncertainty=args.uncertainty,
                            monitors=args.monitors, fail_budget=args.fail_budget, k=args.k, w=args.w,
                            auto_w=args.auto_w, solver=args.solver, seed=args.seed,
                            time_limit=args.time_limit, output=args.output, log=args.log,
                            timings=args.timings, symmetrize=args.symmetrize, symmetry=args.symmetry)
            return cmd_solve(cfg)
        return {
            "oracle": cmd_oracle,
            "evaluate": cmd_evaluate,
            "pof": cmd_pof,
            "generate": cmd_generate,
            "compare": cmd_compare,
        }[args.command](args)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "options"
        print(f"[ERROR] {loc}: {first['msg']}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, DomainError) as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"[INFEASIBLE] {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (CapExceededError, BigMAuditError) as exc:
        print(f"[LIMIT] {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (SolverFailure, CoveringError) as exc:
        print(f"[FAIL] {exc}", file=sys.stderr)
        return EXIT_LIMIT


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("langgraph").setLevel(logging.WARNING)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
