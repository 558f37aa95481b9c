from typing import TypedDict, List, Annotated, Any, Optional
import operator


class BendersState(TypedDict, total=False):
    # Inputs
    instance: Any                          # tools.instance.CoveringInstance
    k: int                                 # number of candidate covering schemes
    symmetry: bool                         # lexicographic ordering of the schemes in the master
    time_limit: float                      # wall-clock budget for the whole run (seconds)
    max_iterations: int                    # stop after this many added blocks
    trace_path: Optional[str]              # JSONL iteration trace (--log)
    started: float                         # perf_counter() at run start

    # Master problem
    model: Any                             # solvers.kadapt_model.KAdaptModel (instantiated blocks only)
    big_m: float                           # current dual cap
    doublings: int                         # how often big_m has been doubled
    report: Any                            # last master SolveReport
    candidate: dict                        # {"x", "schemes", "tau"} read off the last master solve
    upper_bound: float                     # last master objective

    # Separation
    violation: Optional[dict]              # {"scenario", "label", "value"} or None when certified
    incumbent: Optional[dict]              # best exactly-evaluated master decision {"x", "schemes", "value"}

    # Outcome
    solution: Any                          # solvers.kadapt_model.KAdaptSolution once certified
    status: str                            # optimal | infeasible | time_limit | cap_hit | iteration_limit

    # Loop & Metadata
    feedback: str                          # routing token of the last node
    iteration: int
    iterations: Annotated[List[dict], operator.add]
    messages: Annotated[List[str], operator.add]
