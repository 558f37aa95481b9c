"""
tools/instance.py
=================
A covering instance bundles everything a solver needs: graph, protected
groups, availability set, monitor budget ``I`` and the integer group floors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from tools.errors import InputError
from tools.netmodel import Graph, GroupPartition
from tools.uncertainty import UncertaintySet


@dataclass(frozen=True)
class CoveringInstance:
    graph: Graph
    partition: GroupPartition
    uncertainty: UncertaintySet
    budget: int
    floors: tuple[int, ...] = ()
    w: float = 0.0

    def __post_init__(self) -> None:
        n = self.graph.node_count
        if self.partition.node_count != n:
            raise InputError(f"partition covers {self.partition.node_count} nodes, graph has {n}")
        if self.uncertainty.node_count != n:
            raise InputError(f"uncertainty set is over {self.uncertainty.node_count} nodes, graph has {n}")
        if self.budget < 1:
            raise InputError(f"monitor budget I must be at least 1, got {self.budget}")
        if not self.floors:
            object.__setattr__(self, "floors", tuple([0] * self.partition.group_count))
        elif len(self.floors) != self.partition.group_count:
            raise InputError(f"{len(self.floors)} floors for {self.partition.group_count} groups")

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    @property
    def effective_budget(self) -> int:
        """Number of monitors actually placed (``min(I, N)``)."""
        return min(self.budget, self.graph.node_count)

    @property
    def floors_reachable(self) -> bool:
        """False when some floor exceeds its group size, i.e. Y is empty."""
        return all(f <= s for f, s in zip(self.floors, self.partition.group_sizes))

    def with_fairness(self, w: float) -> "CoveringInstance":
        """Copy with floors ``ceil(W |N_c| - 1e-9)``."""
        return replace(self, floors=self.partition.floors(w), w=float(w))

    def with_uncertainty(self, u: UncertaintySet) -> "CoveringInstance":
        return replace(self, uncertainty=u)

    def unconstrained(self) -> "CoveringInstance":
        return self.with_fairness(0.0)
