from __future__ import annotations

import json

import numpy as np
import pytest

from tests.conftest import FIXTURES
from tools.errors import InputError
from tools.netmodel import (
    Graph,
    GroupPartition,
    MonitorSet,
    cover_counts,
    coverage_indicator,
    dump_graph,
    group_coverage,
    load_graph,
    total_coverage,
)


def _star():
    return load_graph(FIXTURES / "star.json")


def test_star_fixture_is_symmetric():
    g, p = _star()
    assert g.node_count == 4
    assert g.is_symmetric()
    assert g.out_neighbors[0] == (1, 2, 3)
    assert p.group_sizes == (2, 2)


def test_cover_counts_follow_in_neighbours():
    g, _ = _star()
    x = MonitorSet.from_nodes(4, [0])
    assert list(cover_counts(g, x, (1, 1, 1, 1))) == [0, 1, 1, 1]
    assert coverage_indicator(g, x, (0, 1, 1, 1)) == (0, 0, 0, 0)


def test_failed_monitor_covers_nothing():
    g, p = _star()
    x = MonitorSet.from_nodes(4, [0, 1])
    assert group_coverage(g, p, x, (1, 1, 1, 1)) == (2, 2)
    assert group_coverage(g, p, x, (0, 1, 1, 1)) == (1, 0)
    assert total_coverage(g, x, (1, 0, 1, 1)) == 3


def test_group_coverage_sums_to_total():
    rng = np.random.default_rng(3)
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)], symmetric=True)
    p = GroupPartition((0, 1, 2, 0, 1, 2))
    for _ in range(20):
        x = tuple(int(v) for v in rng.integers(0, 2, size=6))
        xi = tuple(int(v) for v in rng.integers(0, 2, size=6))
        assert sum(group_coverage(g, p, x, xi)) == total_coverage(g, x, xi)


def test_floors_do_not_round_exact_fractions_up():
    p = GroupPartition((0, 0, 0, 0, 1, 1, 1))
    assert p.floors(0.25) == (1, 1)
    assert p.floors(0.0) == (0, 0)
    assert p.floors(0.5) == (2, 2)
    assert p.floors(1.0) == (4, 3)
    with pytest.raises(InputError):
        p.floors(-0.1)


def test_directed_edges_are_kept_one_way():
    g = Graph.from_edges(3, [(0, 1)])
    assert list(cover_counts(g, (1, 0, 0), (1, 1, 1))) == [0, 1, 0]
    assert list(cover_counts(g.symmetrized(), (0, 1, 0), (1, 1, 1))) == [1, 0, 0]


def test_invalid_structures_are_rejected():
    with pytest.raises(InputError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(InputError):
        Graph.from_edges(3, [(0, 3)])
    with pytest.raises(InputError):
        GroupPartition((0, 2))
    with pytest.raises(InputError):
        MonitorSet((1, 1, 0), budget=1)
    with pytest.raises(InputError):
        cover_counts(Graph.from_edges(3, []), (1, 0), (1, 1, 1))


def test_external_ids_map_in_sorted_order(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({
        "nodes": [{"id": 10, "group": 9}, {"id": 5, "group": 3}, {"id": 7, "group": 9}],
        "edges": [[10, 5]],
    }))
    g, p = load_graph(path)
    assert g.labels == (5, 7, 10)
    assert g.edges == frozenset({(2, 0)})
    assert p.group_of == (0, 1, 1)
    assert load_graph(path, symmetrize=True)[0].edges == frozenset({(2, 0), (0, 2)})


def test_json_syntax_error_carries_line_and_column(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "nodes": [\n    {"id": 0,}\n  ]\n}\n')
    with pytest.raises(InputError, match=r"broken\.json:3:\d+"):
        load_graph(path)


def test_schema_error_carries_field_path(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"nodes": [{"id": "zero"}], "edges": []}))
    with pytest.raises(InputError, match=r"nodes\.0\.id"):
        load_graph(path)


def test_unknown_edge_endpoint(tmp_path):
    path = tmp_path / "edge.json"
    path.write_text(json.dumps({"nodes": [{"id": 0}, {"id": 1}], "edges": [[0, 1], [1, 4]]}))
    with pytest.raises(InputError, match=r"edges\.1"):
        load_graph(path)


def test_missing_file():
    with pytest.raises(InputError, match="cannot read"):
        load_graph(FIXTURES / "does_not_exist.json")


def test_dump_is_deterministic_and_reloads(tmp_path):
    g, p = load_graph(FIXTURES / "path.json")
    text = dump_graph(g, p)
    assert text == dump_graph(g, p)
    path = tmp_path / "again.json"
    path.write_text(text)
    g2, p2 = load_graph(path)
    assert g2.edges == g.edges
    assert p2.group_of == p.group_of
