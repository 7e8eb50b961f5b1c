import numpy as np
import pytest

from elaine_embed.errors import ValidationError
from elaine_embed.synthetic import (
    block_topic,
    generate_sbm_with_edge_topics,
    shuffle_edge_attributes,
)


def test_degenerate_probabilities_give_two_cliques():
    g, ea, labels = generate_sbm_with_edge_topics(
        blocks=2, nodes_per_block=2, p_in=1.0, p_out=0.0, p_topics=2, noise=0.0, seed=0
    )

    assert g.edges() == [(0, 1, 1.0), (2, 3, 1.0)]
    assert ea.vector(0, 1).tolist() == [1.0, 0.0]
    assert ea.vector(2, 3).tolist() == [0.0, 1.0]
    assert [sorted(labels.of(u)) for u in range(4)] == [[0], [0], [1], [1]]


def test_same_seed_same_graph():
    def generate(seed: int):
        return generate_sbm_with_edge_topics(
            blocks=3, nodes_per_block=10, p_in=0.5, p_out=0.05, p_topics=4, noise=0.3, seed=seed
        )

    g1, ea1, _ = generate(7)
    g2, ea2, _ = generate(7)
    g3, _, _ = generate(8)

    assert np.array_equal(g1.adjacency, g2.adjacency)
    assert all(np.array_equal(ea1.rows[key], ea2.rows[key]) for key in ea1.rows)
    assert not np.array_equal(g1.adjacency, g3.adjacency)


def test_topics_follow_blocks():
    g, ea, labels = generate_sbm_with_edge_topics(
        blocks=2, nodes_per_block=5, p_in=1.0, p_out=0.5, p_topics=3, noise=0.2, seed=4
    )
    uniform = np.full(3, 1.0 / 3.0)

    for u, v, _ in g.edges():
        (bu,), (bv,) = labels.of(u), labels.of(v)
        if bu == bv:
            expected = 0.8 * np.eye(3)[bu] + 0.2 * uniform
        else:
            expected = uniform
        assert ea.vector(u, v) == pytest.approx(expected)


def test_block_topic_rows_sum_to_one():
    assert block_topic(1, 4, 0.25, intra=True).sum() == pytest.approx(1.0)
    assert block_topic(1, 4, 0.25, intra=True)[1] == pytest.approx(0.8125)
    assert block_topic(1, 4, 0.25, intra=False).tolist() == [0.25] * 4


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(blocks=0, nodes_per_block=2, p_in=0.5, p_out=0.1, p_topics=1, noise=0.0),
        dict(blocks=2, nodes_per_block=2, p_in=0.1, p_out=0.5, p_topics=2, noise=0.0),
        dict(blocks=3, nodes_per_block=2, p_in=0.5, p_out=0.1, p_topics=2, noise=0.0),
        dict(blocks=2, nodes_per_block=2, p_in=0.5, p_out=0.1, p_topics=2, noise=1.5),
    ],
)
def test_invalid_parameters(kwargs: dict[str, float]):
    with pytest.raises(ValidationError):
        _ = generate_sbm_with_edge_topics(**kwargs, seed=0)  # pyright: ignore[reportArgumentType]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_edge_counts_within_binomial_bounds(seed: int):
    blocks, size, p_in, p_out = 4, 50, 0.15, 0.02
    g, _, labels = generate_sbm_with_edge_topics(
        blocks=blocks, nodes_per_block=size, p_in=p_in, p_out=p_out, p_topics=4, noise=0.2, seed=seed
    )
    intra = sum(1 for u, v, _ in g.edges() if labels.of(u) == labels.of(v))
    inter = g.m - intra

    pairs_in = blocks * size * (size - 1) // 2
    pairs_out = (blocks * size) * (blocks * size - 1) // 2 - pairs_in
    for count, pairs, p in ((intra, pairs_in, p_in), (inter, pairs_out, p_out)):
        sigma = np.sqrt(pairs * p * (1 - p))
        assert abs(count - pairs * p) <= 4 * sigma


def test_full_noise_gives_uniform_topics():
    g, ea, _ = generate_sbm_with_edge_topics(
        blocks=3, nodes_per_block=6, p_in=0.8, p_out=0.2, p_topics=5, noise=1.0, seed=3
    )

    assert g.m > 0
    for u, v, _ in g.edges():
        assert ea.vector(u, v) == pytest.approx(np.full(5, 0.2))


def test_every_block_has_its_label():
    g, _, labels = generate_sbm_with_edge_topics(
        blocks=3, nodes_per_block=7, p_in=0.5, p_out=0.1, p_topics=3, noise=0.0, seed=1
    )
    indicator = labels.indicator(list(range(g.n)))

    assert labels.num_labels == 3
    assert indicator.sum(axis=0).tolist() == [7, 7, 7]
    assert indicator.sum(axis=1).tolist() == [1] * g.n


def test_shuffled_topics_keep_edges_and_vectors():
    g, ea, _ = generate_sbm_with_edge_topics(
        blocks=3, nodes_per_block=10, p_in=0.5, p_out=0.1, p_topics=3, noise=0.0, seed=5
    )
    shuffled = shuffle_edge_attributes(ea, seed=1)

    assert shuffled.p == ea.p
    assert set(shuffled.rows) == set(ea.rows)
    assert sorted(tuple(v) for v in shuffled.rows.values()) == sorted(
        tuple(v) for v in ea.rows.values()
    )
    assert any(
        not np.array_equal(shuffled.rows[key], ea.rows[key]) for key in ea.rows
    )


def test_shuffle_is_deterministic_per_seed():
    _, ea, _ = generate_sbm_with_edge_topics(
        blocks=2, nodes_per_block=10, p_in=0.6, p_out=0.1, p_topics=2, noise=0.0, seed=6
    )
    first = shuffle_edge_attributes(ea, seed=3)
    again = shuffle_edge_attributes(ea, seed=3)

    assert all(np.array_equal(first.rows[key], again.rows[key]) for key in ea.rows)
