import math

import msgspec
import numpy as np

from elaine_embed.errors import ValidationError
from elaine_embed.graph import EdgeKey, Graph, IntArray
from elaine_embed.utils import array_fingerprint


class LinkPredSplit(msgspec.Struct, frozen=True):
    train_graph: Graph
    held_out: list[EdgeKey]
    """Hidden edges (u < v), lexicographic"""
    eval_nodes: IntArray
    """Sorted node ids the candidate pairs are drawn from"""
    seed: int

    def fingerprint(self) -> str:
        held = np.array(self.held_out, dtype=np.int64).reshape(-1, 2)
        return array_fingerprint(self.train_graph.adjacency, held, self.eval_nodes)


def make_split(
    g: Graph, holdout_frac: float, max_eval_nodes: int, seed: int
) -> LinkPredSplit:
    """Hide round(m · holdout_frac) uniformly chosen edges and sample evaluation nodes."""
    if not 0.0 < holdout_frac < 1.0:
        raise ValidationError(f"holdout_frac must lie in (0, 1), got {holdout_frac}")
    if max_eval_nodes < 1:
        raise ValidationError("max_eval_nodes must be positive")

    edges = g.edge_array()
    hidden = math.floor(len(edges) * holdout_frac + 0.5)
    if hidden >= len(edges):
        raise ValidationError(
            f"Hiding {hidden} of {len(edges)} edges leaves no training edges"
        )

    rng = np.random.default_rng(seed)
    chosen = rng.permutation(len(edges))[:hidden]
    held_out = sorted((int(u), int(v)) for u, v in edges[chosen])
    if g.n <= max_eval_nodes:
        eval_nodes = np.arange(g.n, dtype=np.int64)
    else:
        eval_nodes = np.sort(rng.choice(g.n, size=max_eval_nodes, replace=False)).astype(
            np.int64
        )
    return LinkPredSplit(
        train_graph=g.without_edges(held_out),
        held_out=held_out,
        eval_nodes=eval_nodes,
        seed=seed,
    )
