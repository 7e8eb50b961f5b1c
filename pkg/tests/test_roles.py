import pathlib

import numpy as np
import pytest

from elaine_embed.errors import ValidationError
from elaine_embed.graph import EdgeAttributes, Graph
from elaine_embed.roles import (
    ROLE_COLUMNS,
    aggregate_edge_attributes,
    raw_role_features,
    role_features,
    save_role_features,
)


@pytest.fixture
def triangle_with_tail() -> Graph:
    return Graph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 2.0)])


def test_column_order():
    assert ROLE_COLUMNS == (
        "degree",
        "weighted_degree",
        "clustering",
        "eccentricity",
        "structural_hole",
        "local_gatekeeper",
    )


def test_raw_features(triangle_with_tail: Graph):
    raw = raw_role_features(triangle_with_tail)

    assert raw[:, 0].tolist() == [2, 2, 3, 1]
    assert raw[:, 1].tolist() == [2, 2, 4, 2]
    assert raw[:, 2] == pytest.approx([1, 1, 1 / 3, 0])
    assert raw[:, 3].tolist() == [2, 2, 1, 2]
    assert raw[:, 5].tolist() == [1, 1, 2, 1]


def test_structural_hole_on_star(star: Graph):
    raw = raw_role_features(star)

    assert raw[0, 4] == pytest.approx(1 / 3)
    assert raw[1:, 4] == pytest.approx([1.0, 1.0, 1.0])


def test_isolated_node_features():
    raw = raw_role_features(Graph.from_edges(3, [(0, 1, 1.0)]))

    assert raw[2].tolist() == [0, 0, 0, 0, 0, 0]


def test_gatekeeper_of_clique_member_is_one():
    clique = Graph.from_adjacency(np.ones((4, 4)) - np.eye(4))

    assert raw_role_features(clique)[:, 5].tolist() == [1, 1, 1, 1]


def test_eccentricity_per_component():
    g = Graph.from_edges(5, [(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)])

    assert raw_role_features(g)[:, 3].tolist() == [2, 1, 2, 1, 1]


def test_scaled_features(triangle_with_tail: Graph):
    rm = role_features(triangle_with_tail)

    assert rm.R.shape == (4, 6)
    assert np.all((rm.R >= 0) & (rm.R <= 1))
    assert rm.R[:, 0].tolist() == pytest.approx([0.5, 0.5, 1.0, 0.0])
    assert np.array_equal(rm.raw, raw_role_features(triangle_with_tail))


def test_constant_column_scales_to_zero():
    cycle = Graph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])

    assert role_features(cycle).R[:, 0].tolist() == [0, 0, 0, 0]


def test_role_features_reject_empty_graph():
    with pytest.raises(ValidationError):
        _ = role_features(Graph.from_adjacency(np.zeros((0, 0))))


def test_aggregate_edge_attributes():
    g = Graph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0)])
    ea = EdgeAttributes.build(g, 2, {(0, 1): np.array([1.0, 0.0]), (1, 2): np.array([0.0, 1.0])})
    agg = aggregate_edge_attributes(g, ea)

    assert agg.tolist() == [[1, 0], [0.5, 0.5], [0, 1], [0, 0]]


def test_save_role_features(tmp_path: pathlib.Path, triangle_with_tail: Graph):
    rm = role_features(triangle_with_tail)
    save_role_features(tmp_path / "roles.csv", rm)
    lines = (tmp_path / "roles.csv").read_text().splitlines()

    assert lines[0].startswith("node,degree,weighted_degree")
    assert len(lines) == 5
    assert lines[3].startswith("2,3,4,")


def test_triangle_constraint():
    raw = raw_role_features(Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]))

    assert raw[:, 4] == pytest.approx([1.125] * 3)


def test_star_centre_is_gatekeeper_of_every_leaf(star: Graph):
    raw = raw_role_features(star)

    assert raw[0, 5] == 3
    assert raw[1:, 5].tolist() == [1, 1, 1]


@pytest.mark.parametrize(
    ("n", "edges", "row"),
    [
        (6, [(i, (i + 1) % 6) for i in range(6)], [2, 2, 0, 3, 0.5, 2]),
        (5, [(i, j) for i in range(5) for j in range(i + 1, 5)], [4, 4, 1, 1, 4 * (1 / 4 + 3 / 16) ** 2, 1]),
    ],
)
def test_vertex_transitive_graphs_share_one_row(
    n: int, edges: list[tuple[int, int]], row: list[float]
):
    raw = raw_role_features(Graph.from_edges(n, [(u, v, 1.0) for u, v in edges]))

    assert raw == pytest.approx(np.tile(raw[0], (n, 1)))
    assert raw[0] == pytest.approx(row)
