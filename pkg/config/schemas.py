"""
File Schemas for Instances and Results
======================================

Pydantic models for every file the suite reads or writes:

* ``GraphFile``: ``{"nodes": [{"id", "group"}], "edges": [[v, n]], "directed": bool}``
* ``PolyhedralFile``: ``{"A": [[...]], "b": [...]}`` (upward-closed availability set)
* ``ResultRecord``: the versioned result JSON written by ``main.py``

Usage:
    model = GraphFile.model_validate(json.loads(text))
    text = result_to_json(record, timings=False)
"""

from __future__ import annotations

import json
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import RESULT_SCHEMA_VERSION


# ────────────────────────────────────────────────────────────────────
# Input files
# ────────────────────────────────────────────────────────────────────

class NodeRecord(BaseModel):
    """One node of a graph file: external id plus protected-group id."""
    model_config = ConfigDict(extra="forbid")

    id: int = Field(description="External node id (any integers; mapped to 0..N-1 by sorted order).")
    group: int = Field(default=0, description="Protected group id (mapped to 0..C-1 by sorted order).")


class GraphFile(BaseModel):
    """Coverage graph on disk.  Edge ``[v, n]`` means *n can be covered by v*."""
    model_config = ConfigDict(extra="forbid")

    nodes: list[NodeRecord] = Field(min_length=1)
    edges: list[tuple[int, int]] = Field(default_factory=list)
    directed: bool = True


class PolyhedralFile(BaseModel):
    """General availability set ``{xi binary : A xi >= b}``."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    A: list[list[float]] = Field(min_length=1)
    b: list[float] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_shape(self) -> "PolyhedralFile":
        if len(self.A) != len(self.b):
            raise ValueError(f"A has {len(self.A)} rows but b has {len(self.b)} entries")
        widths = {len(row) for row in self.A}
        if len(widths) != 1:
            raise ValueError(f"rows of A have differing lengths {sorted(widths)}")
        return self


# ────────────────────────────────────────────────────────────────────
# Result file (schema 1)
# ────────────────────────────────────────────────────────────────────

class GroupRow(BaseModel):
    """Worst-case coverage of one protected group (one row of the per-group report)."""
    group: int
    size: int
    worst_case_covered: int
    worst_case_percent: float
    minimizing_scenario: list[int]

    @field_validator("worst_case_percent")
    @classmethod
    def _one_decimal(cls, v: float) -> float:
        return round(v, 1)


class ResultRecord(BaseModel):
    """Everything one ``solve`` / ``oracle`` / ``evaluate`` run produces."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_: int = Field(default=RESULT_SCHEMA_VERSION, alias="schema")
    command: str
    solver: str
    status: str
    node_count: int
    monitors: int
    fail_budget: int
    K: int = 1
    W: Optional[float] = None
    tau: Optional[int] = None
    x: list[int] = Field(default_factory=list)
    schemes: list[list[int]] = Field(default_factory=list)
    worst_case_total: Optional[int] = None
    worst_case_total_percent: Optional[float] = None
    groups: list[GroupRow] = Field(default_factory=list)
    iterations: list[dict] = Field(default_factory=list)
    timings: dict[str, float] = Field(default_factory=dict)
    settings: dict = Field(default_factory=dict)

    @field_validator("worst_case_total_percent")
    @classmethod
    def _one_decimal(cls, v: Optional[float]) -> Optional[float]:
        return None if v is None else round(v, 1)


# ────────────────────────────────────────────────────────────────────
# Converters: Pydantic → JSON text
# ────────────────────────────────────────────────────────────────────

def result_to_json(record: ResultRecord, timings: bool = True) -> str:
    """Serialise a result deterministically.

    With ``timings=False`` every wall-clock field is dropped so that two runs
    with identical inputs produce byte-identical files.
    """
    payload = record.model_dump(mode="json", by_alias=True)
    if not timings:
        payload["timings"] = {}
        for row in payload.get("iterations", []):
            row.pop("seconds", None)
            row.pop("master_seconds", None)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
