from dotenv import load_dotenv
import os

load_dotenv()

# ── Enumeration & model-size caps ────────────────────────────────────────────
# Every exact routine in the suite enumerates something (scenarios, monitor
# subsets, label blocks).  Each cap stops a run *before* the enumeration
# starts and reports the count that would have been produced.
# All values can be overridden via .env without touching the code.
#
#   COVER_ENUM_CAP      – scenarios produced by one enumeration      (default 10^6)
#   COVER_ORACLE_CAP    – monitor subsets x scenarios for the oracle (default 10^7)
#   COVER_BLOCK_CAP     – label blocks (N+1)^K in a monolithic model  (default 10^5)
#
# Rule of thumb:
#   • the pure-numpy kernel is comfortable up to a few hundred label blocks;
#     beyond that prefer the Benders solver, which only builds the blocks
#     it needs.
# ---------------------------------------------------------------------------

def _int_env(var: str, default: int) -> int:
    """Read an integer env var with a fallback default."""
    try:
        return int(float(os.getenv(var, str(default))))
    except (ValueError, TypeError):
        return default


def _float_env(var: str, default: float) -> float:
    """Read a float env var with a fallback default."""
    try:
        return float(os.getenv(var, str(default)))
    except (ValueError, TypeError):
        return default


ENUM_CAP   = _int_env("COVER_ENUM_CAP",   10**6)
ORACLE_CAP = _int_env("COVER_ORACLE_CAP", 10**7)
BLOCK_CAP  = _int_env("COVER_BLOCK_CAP",  10**5)

# ── Big-M dual caps ──────────────────────────────────────────────────────────
# Dual variables of every label block are capped at M = factor * N.  The cap
# is audited after each solve; a failed audit doubles M and rebuilds, at most
# COVER_BIG_M_MAX_DOUBLINGS times.
BIG_M_FACTOR        = _float_env("COVER_BIG_M_FACTOR", 10.0)
BIG_M_MAX_DOUBLINGS = _int_env("COVER_BIG_M_MAX_DOUBLINGS", 10)

# ── Numerical tolerances ─────────────────────────────────────────────────────
FEAS_TOL      = _float_env("COVER_FEAS_TOL",      1e-7)
INT_TOL       = _float_env("COVER_INT_TOL",       1e-6)
OBJ_ROUND_TOL = _float_env("COVER_OBJ_ROUND_TOL", 1e-4)
# Fairness floors are ceil(W * |N_c| - FLOOR_EPS)
FLOOR_EPS     = 1e-9

# ── Solver limits ────────────────────────────────────────────────────────────
MILP_TIME_LIMIT = _float_env("COVER_MILP_TIME_LIMIT", 300.0)
MILP_NODE_LIMIT = _int_env("COVER_MILP_NODE_LIMIT", 200_000)
LP_MAX_PIVOTS   = _int_env("COVER_LP_MAX_PIVOTS", 50_000)

# ── Fairness grid ────────────────────────────────────────────────────────────
W_STEP = _float_env("COVER_W_STEP", 0.04)

LOG_LEVEL = os.getenv("COVER_LOG_LEVEL", "INFO").upper()

RESULT_SCHEMA_VERSION = 1


def big_m_for(node_count: int, factor: float | None = None) -> float:
    """Default dual cap M = factor * N (factor from COVER_BIG_M_FACTOR)."""
    return float(factor if factor is not None else BIG_M_FACTOR) * max(1, node_count)


def get_run_metadata() -> dict:
    """Return a snapshot of every resolved setting.

    Stamped into result JSON files and experiment CSVs so you can trace
    which configuration produced which numbers.
    """
    return {
        "enum_cap": ENUM_CAP,
        "oracle_cap": ORACLE_CAP,
        "block_cap": BLOCK_CAP,
        "big_m_factor": BIG_M_FACTOR,
        "big_m_max_doublings": BIG_M_MAX_DOUBLINGS,
        "feas_tol": FEAS_TOL,
        "int_tol": INT_TOL,
        "milp_time_limit": MILP_TIME_LIMIT,
        "milp_node_limit": MILP_NODE_LIMIT,
        "w_step": W_STEP,
    }
