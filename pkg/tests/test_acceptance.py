"""Planted-structure checks on synthetic graphs. Run with `pytest -m slow`."""

import itertools

import numpy as np
import pytest

from elaine_embed.analysis.ablation import run_ablation
from elaine_embed.analysis.classify import run_node_classification
from elaine_embed.analysis.linkpred import expected_random_map, run_link_prediction
from elaine_embed.analysis.splits import LinkPredSplit, make_split
from elaine_embed.analysis.sweep import run_sweep
from elaine_embed.graph import EdgeAttributes, FloatArray, Graph, NodeLabels
from elaine_embed.model import ElaineConfig, embed, predict_edge_attributes, train
from elaine_embed.proximity import WalkConfig
from elaine_embed.synthetic import generate_sbm_with_edge_topics, shuffle_edge_attributes

pytestmark = pytest.mark.slow

BLOCK_SIZE = 50
REPEATS = 5


@pytest.fixture(scope="module")
def benchmark() -> tuple[Graph, EdgeAttributes, NodeLabels]:
    return generate_sbm_with_edge_topics(
        blocks=4,
        nodes_per_block=BLOCK_SIZE,
        p_in=0.15,
        p_out=0.02,
        p_topics=4,
        noise=0.2,
        seed=0,
    )


@pytest.fixture(scope="module")
def benchmark_cfg() -> ElaineConfig:
    return ElaineConfig(
        dim=32,
        encoder_hidden=(256, 128),
        edge_decoder_hidden=(32,),
        epochs=60,
        learning_rate=5e-3,
        walk=WalkConfig(k=10, l=5),
    )


@pytest.fixture(scope="module")
def tuned_cfg(benchmark_cfg: ElaineConfig) -> ElaineConfig:
    """Best of the alpha_1 grid on the benchmark, trained to convergence."""
    return benchmark_cfg.model_copy(update={"alpha_1": 100.0, "epochs": 120})


def random_baseline_map(g: Graph, cfg: ElaineConfig) -> float:
    """Expected random-ranking MAP over the splits `run_link_prediction` uses."""
    splits = [make_split(g, 0.2, 1024, cfg.seed + i) for i in range(REPEATS)]
    return float(np.mean([expected_random_map(split) for split in splits]))


def block_oracle(split: LinkPredSplit, ea: EdgeAttributes) -> FloatArray:
    block = np.arange(split.train_graph.n) // BLOCK_SIZE
    return (block[:, None] == block[None, :]).astype(np.float64)


def test_planted_blocks_clear_the_recovery_bar(
    benchmark: tuple[Graph, EdgeAttributes, NodeLabels], benchmark_cfg: ElaineConfig
):
    g, ea, _ = benchmark
    oracle = run_link_prediction(g, ea, benchmark_cfg, repeats=REPEATS, scorer=block_oracle)

    assert oracle.map.mean >= 3 * random_baseline_map(g, benchmark_cfg)


def test_recovers_planted_links(
    benchmark: tuple[Graph, EdgeAttributes, NodeLabels], tuned_cfg: ElaineConfig
):
    g, ea, _ = benchmark
    elaine = run_link_prediction(g, ea, tuned_cfg, repeats=REPEATS, jobs=REPEATS)

    assert elaine.repeats == REPEATS
    assert elaine.map.mean >= 3 * random_baseline_map(g, tuned_cfg)


def test_ablation_ladder_order(
    benchmark: tuple[Graph, EdgeAttributes, NodeLabels], tuned_cfg: ElaineConfig
):
    g, ea, _ = benchmark
    ladder = run_ablation(g, ea, tuned_cfg, repeats=REPEATS, jobs=REPEATS)
    rows = {row.variant: row for row in ladder}
    chain = ["AE", "VAE+HO", "VAE+HO-R", "NA-ELAINE", "ELAINE"]
    inversions = [
        (lower, upper)
        for lower, upper in itertools.pairwise(chain)
        if rows[lower].map_mean > rows[upper].map_mean
    ]

    assert rows["ELAINE"].map_mean > rows["NA-ELAINE"].map_mean
    assert len(inversions) <= 1
    for lower, upper in inversions:
        gap = rows[lower].map_mean - rows[upper].map_mean
        assert gap <= max(rows[lower].map_std, rows[upper].map_std)


def test_overweighted_edge_loss_hurts_when_topics_are_noise(benchmark_cfg: ElaineConfig):
    g, ea, _ = generate_sbm_with_edge_topics(
        blocks=4,
        nodes_per_block=BLOCK_SIZE,
        p_in=0.3,
        p_out=0.02,
        p_topics=4,
        noise=0.2,
        seed=1,
    )
    cfg = benchmark_cfg.model_copy(update={"dim": 8})
    rows = run_sweep(
        g,
        shuffle_edge_attributes(ea, seed=1),
        cfg,
        "alpha_1",
        [0.1, 1.0, 10.0, 100.0],
        repeats=REPEATS,
        jobs=REPEATS,
    )
    by_alpha = {row.value: row.map_mean for row in rows}

    assert max(by_alpha[0.1], by_alpha[1.0], by_alpha[10.0]) > by_alpha[100.0]


def test_larger_dimension_beats_tiny(
    benchmark: tuple[Graph, EdgeAttributes, NodeLabels], benchmark_cfg: ElaineConfig
):
    g, ea, _ = benchmark
    rows = run_sweep(g, ea, benchmark_cfg, "dim", [2, 8, 32, 128], repeats=3, jobs=3)
    by_dim = {int(row.value): row.map_mean for row in rows}

    assert by_dim[32] > by_dim[2]


def test_node_classification_on_clean_blocks():
    g, ea, labels = generate_sbm_with_edge_topics(
        blocks=3, nodes_per_block=40, p_in=0.3, p_out=0.0, p_topics=3, noise=0.0, seed=2
    )
    cfg = ElaineConfig(
        dim=16,
        encoder_hidden=(128, 64),
        edge_decoder_hidden=(16,),
        epochs=60,
        learning_rate=5e-3,
    )
    result = train(g, ea, cfg, jobs=4)
    rows = run_node_classification(embed(result.model, result.features), labels, (0.5,), 5, 0)

    assert rows[0].repeats == 5
    assert rows[0].micro_mean >= 0.9
    assert rows[0].macro_mean >= 0.9


def test_edge_decoder_recovers_planted_topics():
    g, ea, _ = generate_sbm_with_edge_topics(
        blocks=3, nodes_per_block=30, p_in=0.3, p_out=0.02, p_topics=3, noise=0.0, seed=3
    )
    split = make_split(g, 0.2, 1024, seed=0)
    cfg = ElaineConfig(
        dim=16,
        encoder_hidden=(128, 64),
        edge_decoder_hidden=(16,),
        epochs=80,
        learning_rate=5e-3,
    )
    result = train(split.train_graph, ea.restrict(split.train_graph), cfg, jobs=4)
    emb = embed(result.model, result.features)

    block = np.arange(g.n) // 30
    intra = [(u, v) for u, v in split.held_out if block[u] == block[v]]
    hits = [
        int(np.argmax(predict_edge_attributes(result.model, emb.Y, u, v))) == block[u]
        for u, v in intra
    ]

    assert intra
    assert np.mean(hits) >= 0.8
