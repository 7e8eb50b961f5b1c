import numpy as np

from elaine_embed.errors import ValidationError
from elaine_embed.graph import EdgeAttributes, EdgeKey, FloatArray, Graph, NodeLabels
from elaine_embed.logger import logger


def block_topic(
    block: int, p_topics: int, noise: float, intra: bool
) -> FloatArray:
    """Planted attribute vector: the block's one-hot topic blended with the
    uniform vector, or the plain uniform vector for inter-block edges."""
    uniform = np.full(p_topics, 1.0 / p_topics)
    if not intra:
        return uniform
    onehot = np.zeros(p_topics)
    onehot[block] = 1.0
    return (1.0 - noise) * onehot + noise * uniform


def generate_sbm_with_edge_topics(
    blocks: int,
    nodes_per_block: int,
    p_in: float,
    p_out: float,
    p_topics: int,
    noise: float,
    seed: int,
) -> tuple[Graph, EdgeAttributes, NodeLabels]:
    """Stochastic block model with one planted edge topic per block.

    Node u belongs to block u // nodes_per_block and carries that block as its
    single label; block b's topic is topic b.
    """
    if blocks < 1 or nodes_per_block < 1:
        raise ValidationError("blocks and nodes_per_block must be positive")
    if not 0.0 <= p_out < p_in <= 1.0:
        raise ValidationError(
            f"Planted structure requires 0 <= p_out < p_in <= 1, got p_in={p_in} p_out={p_out}"
        )
    if p_topics < blocks:
        raise ValidationError(f"p_topics ({p_topics}) must be >= blocks ({blocks})")
    if not 0.0 <= noise <= 1.0:
        raise ValidationError(f"noise must lie in [0, 1], got {noise}")

    n = blocks * nodes_per_block
    membership = np.repeat(np.arange(blocks), nodes_per_block)
    same_block = membership[:, None] == membership[None, :]
    prob = np.where(same_block, p_in, p_out)

    rng = np.random.default_rng(seed)
    draws = rng.random((n, n))
    upper = np.triu(draws < prob, k=1)
    adjacency = (upper | upper.T).astype(np.float64)
    g = Graph.from_adjacency(adjacency)

    attrs: dict[EdgeKey, FloatArray] = {}
    for u, v, _ in g.edges():
        intra = bool(membership[u] == membership[v])
        attrs[(u, v)] = block_topic(int(membership[u]), p_topics, noise, intra)
    ea = EdgeAttributes.build(g, p_topics, attrs)

    labels = NodeLabels.build({u: {int(membership[u])} for u in range(n)})
    logger.info(
        f"Generated SBM: blocks={blocks} n={n} m={g.m} p_in={p_in} p_out={p_out} seed={seed}"
    )
    return g, ea, labels


def shuffle_edge_attributes(ea: EdgeAttributes, seed: int) -> EdgeAttributes:
    """Permute attribute vectors across edges, keeping the edge set and the
    multiset of vectors. Breaks any link between topics and graph structure."""
    keys = sorted(ea.rows)
    order = np.random.default_rng(seed).permutation(len(keys))
    rows = {key: ea.rows[keys[int(i)]] for key, i in zip(keys, order)}
    return EdgeAttributes(p=ea.p, rows=rows, missing=ea.missing)
