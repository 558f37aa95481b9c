"""
evaluation/sbm.py
=================
Stochastic block model instances for the price-of-fairness study.

Communities are the protected groups.  Within community ``c`` an edge is
present with probability ``min(1, a_c / |N_c|)``; between ``c`` and ``c'``
with probability ``min(1, b_cc' / (m log^2 m))`` where ``m`` is the larger
of the two community sizes.  Undirected edges become symmetric directed
pairs.
"""

from __future__ import annotations

import math
from typing import Union

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tools.netmodel import Graph, GroupPartition


class SbmParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sizes: list[int] = Field(min_length=1)
    a: Union[float, list[float]] = 1.0
    b: Union[float, list[list[float]]] = 0.0
    seed: int = 0

    @field_validator("sizes")
    @classmethod
    def _sizes(cls, v: list[int]) -> list[int]:
        if any(s < 2 for s in v):
            raise ValueError(f"community sizes must be at least 2, got {v}")
        if v != sorted(v):
            raise ValueError(f"community sizes must be nondecreasing, got {v}")
        return v

    @model_validator(mode="after")
    def _shapes(self) -> "SbmParams":
        c = len(self.sizes)
        if isinstance(self.a, list) and len(self.a) != c:
            raise ValueError(f"{len(self.a)} within coefficients for {c} communities")
        if isinstance(self.b, list) and (len(self.b) != c or any(len(r) != c for r in self.b)):
            raise ValueError(f"between coefficients must be a {c}x{c} matrix")
        if isinstance(self.b, list) and not np.allclose(self.b, np.transpose(self.b)):
            raise ValueError("between coefficients must be symmetric")
        if np.any(np.asarray(self.a, dtype=float) < 0) or np.any(np.asarray(self.b, dtype=float) < 0):
            raise ValueError("edge coefficients must be non-negative")
        return self

    @property
    def community_count(self) -> int:
        return len(self.sizes)

    def within(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.a, dtype=float), (self.community_count,)).copy()

    def between(self) -> np.ndarray:
        c = self.community_count
        return np.broadcast_to(np.asarray(self.b, dtype=float), (c, c)).copy()

    def probabilities(self) -> list[list[float]]:
        """Block probability matrix handed to ``networkx.stochastic_block_model``."""
        a, b = self.within(), self.between()
        c = self.community_count
        probs = [[0.0] * c for _ in range(c)]
        for i in range(c):
            for j in range(c):
                if i == j:
                    probs[i][j] = min(1.0, a[i] / self.sizes[i])
                else:
                    m = max(self.sizes[i], self.sizes[j])
                    probs[i][j] = min(1.0, b[i, j] / (m * math.log(m) ** 2))
        return probs


def generate_sbm(params: SbmParams) -> tuple[Graph, GroupPartition]:
    """Draw one SBM graph; identical params and seed give identical graphs."""
    sbm = nx.stochastic_block_model(params.sizes, params.probabilities(), seed=params.seed,
                                    directed=False, selfloops=False)
    edges = [(int(u), int(v)) for u, v in sbm.edges()]
    groups = tuple(c for c, size in enumerate(params.sizes) for _ in range(size))
    return Graph.from_edges(sum(params.sizes), edges, symmetric=True), GroupPartition(groups)


def sample_seed(seed: int, index: int) -> int:
    """Per-sample seed derived from ``(master seed, sample index)``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])
