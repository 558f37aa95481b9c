"""
tools/netmodel.py
=================
Coverage graph, protected-group partition and the coverage semantics

    y_n(x, xi) = 1  iff  some in-neighbour nu of n has x_nu = 1 and xi_nu = 1.

Node ids are 0..N-1 internally.  External ids (whatever the graph file
uses) are kept in ``Graph.labels`` and mapped at ingestion time by
:func:`load_graph`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from pydantic import ValidationError

from config.schemas import GraphFile, NodeRecord
from config.settings import FLOOR_EPS
from tools.errors import InputError


# ────────────────────────────────────────────────────────────────────
# Domain types
# ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Graph:
    """Directed coverage graph; edge ``(nu, n)`` means *n can be covered by nu*."""

    node_count: int
    edges: frozenset[tuple[int, int]]
    labels: tuple[int, ...] = ()
    in_neighbors: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    out_neighbors: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = self.node_count
        if n < 1:
            raise InputError(f"graph needs at least one node, got {n}")
        incoming: list[list[int]] = [[] for _ in range(n)]
        outgoing: list[list[int]] = [[] for _ in range(n)]
        for nu, v in self.edges:
            if not (0 <= nu < n and 0 <= v < n):
                raise InputError(f"edge ({nu}, {v}) references a node outside 0..{n - 1}")
            if nu == v:
                raise InputError(f"self-loop on node {nu}: a node never covers itself")
            incoming[v].append(nu)
            outgoing[nu].append(v)
        object.__setattr__(self, "in_neighbors", tuple(tuple(sorted(s)) for s in incoming))
        object.__setattr__(self, "out_neighbors", tuple(tuple(sorted(s)) for s in outgoing))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(n)))
        elif len(self.labels) != n:
            raise InputError(f"{len(self.labels)} labels for {n} nodes")

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]],
                   symmetric: bool = False, labels: Sequence[int] = ()) -> "Graph":
        pairs = {(int(a), int(b)) for a, b in edges}
        if symmetric:
            pairs |= {(b, a) for a, b in pairs}
        return cls(node_count, frozenset(pairs), tuple(labels))

    def symmetrized(self) -> "Graph":
        return Graph.from_edges(self.node_count, self.edges, symmetric=True, labels=self.labels)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Read-only 0/1 matrix with ``adj[nu, n] = 1`` iff ``(nu, n)`` is an edge."""
        adj = np.zeros((self.node_count, self.node_count), dtype=np.int64)
        for nu, n in self.edges:
            adj[nu, n] = 1
        adj.setflags(write=False)
        return adj

    def out_degree(self, node: int) -> int:
        return len(self.out_neighbors[node])

    def is_symmetric(self) -> bool:
        return all((b, a) in self.edges for a, b in self.edges)


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint, exhaustive protected groups ``N_c``; ``group_of[n]`` in 0..C-1."""

    group_of: tuple[int, ...]
    group_sizes: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        if not self.group_of:
            raise InputError("empty group partition")
        count = max(self.group_of) + 1
        if min(self.group_of) < 0:
            raise InputError("group ids must be non-negative")
        sizes = [0] * count
        for g in self.group_of:
            sizes[g] += 1
        empty = [c for c, s in enumerate(sizes) if s == 0]
        if empty:
            raise InputError(f"groups {empty} have no members")
        object.__setattr__(self, "group_sizes", tuple(sizes))

    @classmethod
    def single(cls, node_count: int) -> "GroupPartition":
        return cls(tuple([0] * node_count))

    @property
    def group_count(self) -> int:
        return len(self.group_sizes)

    @property
    def node_count(self) -> int:
        return len(self.group_of)

    def members(self, group: int) -> tuple[int, ...]:
        return tuple(n for n, g in enumerate(self.group_of) if g == group)

    def floors(self, w: float) -> tuple[int, ...]:
        """Integer fairness floors ``ceil(W * |N_c| - 1e-9)`` for every group."""
        if w < 0:
            raise InputError(f"fairness level W must be non-negative, got {w}")
        return tuple(max(0, math.ceil(w * size - FLOOR_EPS)) for size in self.group_sizes)


@dataclass(frozen=True)
class MonitorSet:
    """First-stage decision ``x`` with its budget ``I`` (set X membership)."""

    x: tuple[int, ...]
    budget: int

    def __post_init__(self) -> None:
        if any(v not in (0, 1) for v in self.x):
            raise InputError("monitor vector must be binary")
        if sum(self.x) > self.budget:
            raise InputError(f"{sum(self.x)} monitors selected but the budget is {self.budget}")

    @classmethod
    def from_nodes(cls, node_count: int, nodes: Iterable[int], budget: int | None = None) -> "MonitorSet":
        chosen = set(nodes)
        if any(not 0 <= n < node_count for n in chosen):
            raise InputError(f"monitor ids must lie in 0..{node_count - 1}")
        x = tuple(1 if n in chosen else 0 for n in range(node_count))
        return cls(x, len(chosen) if budget is None else budget)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(n for n, v in enumerate(self.x) if v)


# A scenario is a binary availability vector xi (1 = node available).
Scenario = tuple[int, ...]


@dataclass(frozen=True)
class CoveringScheme:
    """Candidate covering scheme ``y`` with the group floors it must meet."""

    y: tuple[int, ...]
    fairness_floor: tuple[int, ...] = ()

    @property
    def covered(self) -> int:
        return sum(self.y)

    def meets_floors(self, partition: GroupPartition) -> bool:
        if not self.fairness_floor:
            return True
        counts = np.bincount(np.asarray(partition.group_of), weights=np.asarray(self.y),
                             minlength=partition.group_count)
        return bool(np.all(counts >= np.asarray(self.fairness_floor) - 1e-9))


# ────────────────────────────────────────────────────────────────────
# Coverage semantics
# ────────────────────────────────────────────────────────────────────

def as_binary_vector(v, n: int, name: str) -> np.ndarray:
    raw = v.x if isinstance(v, MonitorSet) else v.y if isinstance(v, CoveringScheme) else v
    arr = np.asarray(raw, dtype=np.int64)
    if arr.shape != (n,):
        raise InputError(f"{name} has length {arr.size}, expected {n}")
    if np.any((arr != 0) & (arr != 1)):
        raise InputError(f"{name} must be binary")
    return arr


def cover_counts(g: Graph, x, xi) -> np.ndarray:
    """Number of available monitors among the in-neighbours of every node."""
    xv = as_binary_vector(x, g.node_count, "monitor vector")
    sv = as_binary_vector(xi, g.node_count, "scenario")
    return g.adjacency.T @ (xv * sv)


def coverage_indicator(g: Graph, x, xi) -> tuple[int, ...]:
    """``y(x, xi)``: 1 where some available monitor covers the node."""
    return tuple(int(c >= 1) for c in cover_counts(g, x, xi))


def group_coverage(g: Graph, p: GroupPartition, x, xi) -> tuple[int, ...]:
    """Per-group coverage ``F_{G,c}(x, xi)``; sums to ``F_G(x, xi)``."""
    if p.node_count != g.node_count:
        raise InputError(f"partition covers {p.node_count} nodes, graph has {g.node_count}")
    y = np.asarray(coverage_indicator(g, x, xi))
    counts = np.bincount(np.asarray(p.group_of), weights=y, minlength=p.group_count)
    return tuple(int(round(c)) for c in counts)


def total_coverage(g: Graph, x, xi) -> int:
    """``F_G(x, xi) = e'y(x, xi)``."""
    return sum(coverage_indicator(g, x, xi))


# ────────────────────────────────────────────────────────────────────
# Graph JSON ingestion / emission
# ────────────────────────────────────────────────────────────────────

def graph_from_file_model(model: GraphFile, symmetrize: bool = False) -> tuple[Graph, GroupPartition]:
    """Map a parsed graph file onto internal ids (sorted external ids -> 0..N-1)."""
    ids = sorted(node.id for node in model.nodes)
    if len(set(ids)) != len(ids):
        raise InputError("graph file: duplicate node ids")
    index = {ext: i for i, ext in enumerate(ids)}
    group_ids = sorted({node.group for node in model.nodes})
    group_index = {ext: c for c, ext in enumerate(group_ids)}
    group_of = [0] * len(ids)
    for node in model.nodes:
        group_of[index[node.id]] = group_index[node.group]
    edges = []
    for pos, (a, b) in enumerate(model.edges):
        if a not in index or b not in index:
            raise InputError(f"graph file: edges.{pos} references unknown node id ({a}, {b})")
        if a == b:
            raise InputError(f"graph file: edges.{pos} is a self-loop on node {a}")
        edges.append((index[a], index[b]))
    graph = Graph.from_edges(len(ids), edges, symmetric=symmetrize or not model.directed, labels=ids)
    return graph, GroupPartition(tuple(group_of))


def load_graph(path: str | Path, symmetrize: bool = False) -> tuple[Graph, GroupPartition]:
    """Read a graph JSON file; raises :class:`InputError` with a located diagnostic."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: cannot read graph file ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        model = GraphFile.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise InputError(f"{path}: {loc}: {first['msg']}") from exc
    try:
        return graph_from_file_model(model, symmetrize=symmetrize)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def graph_to_file_model(g: Graph, p: GroupPartition) -> GraphFile:
    return GraphFile(
        nodes=[NodeRecord(id=g.labels[n], group=p.group_of[n]) for n in range(g.node_count)],
        edges=sorted((g.labels[a], g.labels[b]) for a, b in g.edges),
        directed=True,
    )


def dump_graph(g: Graph, p: GroupPartition) -> str:
    """Deterministic JSON text for a graph (byte-identical for identical graphs)."""
    return json.dumps(graph_to_file_model(g, p).model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def save_graph(g: Graph, p: GroupPartition, path: str | Path) -> None:
    Path(path).write_text(dump_graph(g, p), encoding="utf-8")
