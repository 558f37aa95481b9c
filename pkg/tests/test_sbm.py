from __future__ import annotations

import math

import pytest
from pydantic import ValidationError

from evaluation.sbm import SbmParams, generate_sbm, sample_seed


def test_same_seed_same_graph():
    params = SbmParams(sizes=[20, 40], a=3.0, b=1.0, seed=11)
    g1, p1 = generate_sbm(params)
    g2, p2 = generate_sbm(params)
    assert g1.edges == g2.edges
    assert p1.group_of == p2.group_of
    assert generate_sbm(params.model_copy(update={"seed": 12}))[0].edges != g1.edges


def test_communities_are_contiguous_groups():
    graph, partition = generate_sbm(SbmParams(sizes=[3, 5], seed=1))
    assert graph.node_count == 8
    assert partition.group_of == (0, 0, 0, 1, 1, 1, 1, 1)
    assert graph.is_symmetric()


def test_saturated_within_and_zero_between_gives_cliques():
    graph, _ = generate_sbm(SbmParams(sizes=[4, 6], a=10.0, b=0.0))
    assert len(graph.edges) == 2 * (6 + 15)
    assert all((u < 4) == (v < 4) for u, v in graph.edges)


def test_probabilities():
    probs = SbmParams(sizes=[20, 40], a=3.0, b=1.0).probabilities()
    assert probs[0][0] == pytest.approx(0.15)
    assert probs[1][1] == pytest.approx(0.075)
    assert probs[0][1] == probs[1][0] == pytest.approx(1.0 / (40 * math.log(40) ** 2))


def test_per_community_coefficients():
    params = SbmParams(sizes=[10, 10], a=[2.0, 5.0], b=[[0.0, 3.0], [3.0, 0.0]])
    assert params.within().tolist() == [2.0, 5.0]
    assert params.probabilities()[1][1] == pytest.approx(0.5)


def test_edge_density_matches_the_model():
    graph, _ = generate_sbm(SbmParams(sizes=[200, 200], a=4.0, b=0.0, seed=3))
    expected = 2 * math.comb(200, 2) * 4.0 / 200
    assert abs(len(graph.edges) / 2 - expected) < 0.15 * expected


@pytest.mark.parametrize("kwargs", [
    {"sizes": [5, 3]},
    {"sizes": [1, 3]},
    {"sizes": [3, 3], "a": [1.0]},
    {"sizes": [3, 3], "b": [[0.0, 1.0], [2.0, 0.0]]},
    {"sizes": [3, 3], "a": -1.0},
])
def test_invalid_parameters(kwargs):
    with pytest.raises(ValidationError):
        SbmParams(**kwargs)


def test_sample_seeds_are_stable_and_distinct():
    assert sample_seed(7, 0) == sample_seed(7, 0)
    assert len({sample_seed(7, i) for i in range(50)}) == 50
