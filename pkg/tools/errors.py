"""
tools/errors.py
===============
Exception hierarchy shared by every layer of the covering suite.

Solver outcomes such as *infeasible* or *time limit* are NOT exceptions
inside the kernel (they are ``SolveStatus`` values); the classes below are
raised where a caller asked for something that cannot be delivered.
"""

from __future__ import annotations


class CoveringError(Exception):
    """Base class for all errors raised by the suite."""


class InputError(CoveringError, ValueError):
    """Malformed or inconsistent input (dimensions, ids, file contents)."""


class DomainError(CoveringError, ValueError):
    """A closed-form formula was evaluated outside its domain."""


class CapExceededError(CoveringError):
    """An enumeration or model-size cap would be exceeded.

    ``count`` is the (estimated) number of items the operation would
    have produced, ``cap`` the configured limit.
    """

    def __init__(self, what: str, count: int, cap: int):
        self.what = what
        self.count = count
        self.cap = cap
        super().__init__(f"{what}: {count:,} exceeds the configured cap of {cap:,}")


class InfeasibleError(CoveringError):
    """No monitor choice satisfies the requested fairness floors."""


class BigMAuditError(CoveringError):
    """Dual-variable caps stayed too small after every allowed doubling."""


class SolverFailure(CoveringError):
    """The LP/MILP kernel hit a numerical failure it could not recover from."""
