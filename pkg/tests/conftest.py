import numpy as np
import pytest

from elaine_embed.graph import EdgeAttributes, Graph, NodeLabels
from elaine_embed.model import ElaineConfig
from elaine_embed.proximity import WalkConfig
from elaine_embed.synthetic import generate_sbm_with_edge_topics


@pytest.fixture
def path_graph() -> Graph:
    return Graph.from_edges(2, [(0, 1, 1.0)])


@pytest.fixture
def star() -> Graph:
    """Centre 0 with leaves 1, 2, 3."""
    return Graph.from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])


@pytest.fixture
def ring() -> tuple[Graph, EdgeAttributes]:
    """8-cycle with two chords and random two-dimensional edge attributes."""
    edges = [(u, (u + 1) % 8, 1.0) for u in range(8)] + [(0, 4, 2.0), (2, 6, 1.0)]
    g = Graph.from_edges(8, edges)
    rng = np.random.default_rng(11)
    rows = {(u, v): rng.uniform(0.05, 1.0, size=2) for u, v, _ in g.edges()}
    return g, EdgeAttributes.build(g, 2, rows)


@pytest.fixture
def planted() -> tuple[Graph, EdgeAttributes, NodeLabels]:
    return generate_sbm_with_edge_topics(
        blocks=2, nodes_per_block=8, p_in=0.8, p_out=0.1, p_topics=2, noise=0.0, seed=1
    )


@pytest.fixture
def tiny_cfg() -> ElaineConfig:
    return ElaineConfig(
        dim=2,
        encoder_hidden=(5, 4),
        edge_decoder_hidden=(3,),
        epochs=3,
        minibatch_size=4,
        walk=WalkConfig(k=5, l=3),
    )


@pytest.fixture
def planted_graph(planted: tuple[Graph, EdgeAttributes, NodeLabels]) -> Graph:
    return planted[0]
