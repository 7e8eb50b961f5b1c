import pathlib

import networkx as nx
import numpy as np
import pydantic
import pytest
from scipy.stats import spearmanr

from elaine_embed.errors import ValidationError
from elaine_embed.graph import Graph
from elaine_embed.proximity import (
    WalkConfig,
    build_similarity,
    cached_similarity,
    common_neighbors,
    exact_visit_distribution,
    katz_index,
    random_walk,
    transition_matrix,
)
from elaine_embed.synthetic import generate_sbm_with_edge_topics


def test_walk_on_single_edge_is_forced(path_graph: Graph):
    walk = random_walk(path_graph, 0, 3, np.random.default_rng(0))

    assert walk.tolist() == [1, 0, 1]


def test_walk_from_isolated_node_is_empty():
    g = Graph.from_edges(3, [(0, 1, 1.0)])

    assert len(random_walk(g, 2, 5, np.random.default_rng(0))) == 0


def test_walk_ignores_edge_weights():
    g = Graph.from_edges(3, [(0, 1, 100.0), (0, 2, 1.0)])
    rng = np.random.default_rng(3)
    firsts = np.array([random_walk(g, 0, 1, rng)[0] for _ in range(4000)])

    assert np.mean(firsts == 1) == pytest.approx(0.5, abs=0.03)


def test_star_second_step_is_uniform(star: Graph):
    rng = np.random.default_rng(42)
    walks = np.array([random_walk(star, 1, 2, rng) for _ in range(30_000)])

    assert np.all(walks[:, 0] == 0)
    for leaf in (1, 2, 3):
        assert np.mean(walks[:, 1] == leaf) == pytest.approx(1 / 3, abs=0.02)


def test_similarity_on_single_edge(path_graph: Graph):
    S = build_similarity(path_graph, WalkConfig(k=4, l=3)).S

    assert S[0, 1] == pytest.approx(8 / 12)
    assert S[0, 0] == pytest.approx(4 / 12)


def test_similarity_rows(planted_graph: Graph):
    g = Graph.from_adjacency(
        np.pad(planted_graph.adjacency, ((0, 1), (0, 1)))
    )
    S = build_similarity(g, WalkConfig(k=7, l=4)).S

    assert S.shape == (g.n, g.n)
    assert np.all((S >= 0) & (S <= 1))
    connected = g.degree > 0
    assert S[connected].sum(axis=1) == pytest.approx(np.ones(connected.sum()))
    assert np.all(S[-1] == 0)


def test_similarity_independent_of_jobs(planted_graph: Graph):
    cfg = WalkConfig(k=6, l=4, seed=9)

    one = build_similarity(planted_graph, cfg, jobs=1).S
    many = build_similarity(planted_graph, cfg, jobs=3).S

    assert np.array_equal(one, many)
    assert np.array_equal(one, build_similarity(planted_graph, cfg, jobs=1).S)
    assert not np.array_equal(one, build_similarity(planted_graph, cfg.model_copy(update={"seed": 10})).S)


def test_similarity_rejects_empty_graph():
    with pytest.raises(ValidationError):
        _ = build_similarity(Graph.from_adjacency(np.zeros((0, 0))), WalkConfig())


def test_walk_config_bounds():
    with pytest.raises(pydantic.ValidationError):
        _ = WalkConfig(k=0)
    with pytest.raises(pydantic.ValidationError):
        _ = WalkConfig(l=0)


def test_exact_visit_distribution_on_single_edge(path_graph: Graph):
    exact = exact_visit_distribution(path_graph, 3)

    assert exact[0].tolist() == pytest.approx([1 / 3, 2 / 3])


def test_monte_carlo_matches_exact_and_katz():
    g, _, _ = generate_sbm_with_edge_topics(
        blocks=2, nodes_per_block=15, p_in=0.5, p_out=0.1, p_topics=2, noise=0.0, seed=5
    )
    S = build_similarity(g, WalkConfig(k=1000, l=5, seed=1)).S

    assert np.max(np.abs(S - exact_visit_distribution(g, 5))) < 0.05

    K = katz_index(g, 0.05)
    off = ~np.eye(g.n, dtype=bool)
    rho = spearmanr(S[off], K[off]).statistic
    assert rho > 0.5


def test_transition_matrix_rows(star: Graph):
    P = transition_matrix(star)

    assert P[0].tolist() == pytest.approx([0, 1 / 3, 1 / 3, 1 / 3])
    assert P[1].tolist() == [1.0, 0.0, 0.0, 0.0]


def test_katz_closed_form(path_graph: Graph):
    K = katz_index(path_graph, 0.5)

    assert K[0, 1] == pytest.approx(2 / 3)
    assert K[0, 0] == pytest.approx(1 / 3)
    assert np.allclose(K, K.T)


def test_katz_diverges(path_graph: Graph):
    with pytest.raises(ValidationError):
        _ = katz_index(path_graph, 1.0)
    with pytest.raises(ValidationError):
        _ = katz_index(path_graph, 0.0)


def test_common_neighbors(star: Graph):
    cn = common_neighbors(star)

    assert cn[1, 2] == 1.0
    assert cn[0, 1] == 0.0
    assert np.all(np.diag(cn) == 0)


def test_cached_similarity_reuses_file(tmp_path: pathlib.Path, planted_graph: Graph):
    cfg = WalkConfig(k=3, l=2)
    first = cached_similarity(planted_graph, cfg, tmp_path)
    files = list(tmp_path.glob("*.npy"))

    assert len(files) == 1
    marker = np.array(first.S)
    marker[0, 0] = 0.123
    np.save(files[0], marker)

    assert cached_similarity(planted_graph, cfg, tmp_path).S[0, 0] == 0.123
    assert np.array_equal(cached_similarity(planted_graph, cfg, None).S, first.S)


def test_monte_carlo_error_shrinks_with_more_walks():
    G = nx.connected_watts_strogatz_graph(10, 4, 0.3, seed=2)
    g = Graph.from_edges(10, [(u, v, 1.0) for u, v in G.edges()])
    exact = exact_visit_distribution(g, 4)

    errors: list[float] = []
    for k in (10, 100, 1000):
        per_seed = [
            np.max(np.abs(build_similarity(g, WalkConfig(k=k, l=4, seed=seed)).S - exact))
            for seed in range(5)
        ]
        errors.append(float(np.mean(per_seed)))

    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.06
