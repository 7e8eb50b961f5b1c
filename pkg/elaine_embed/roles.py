import pathlib

import msgspec
import networkx as nx
import numpy as np
from sklearn.preprocessing import MinMaxScaler

from elaine_embed.errors import ValidationError
from elaine_embed.graph import EdgeAttributes, FloatArray, Graph

ROLE_COLUMNS = (
    "degree",
    "weighted_degree",
    "clustering",
    "eccentricity",
    "structural_hole",
    "local_gatekeeper",
)


class RoleMatrix(msgspec.Struct, frozen=True):
    raw: FloatArray
    """n×6 unscaled statistics, columns in ROLE_COLUMNS order"""
    scaled: FloatArray
    """Per-column min-max scaled copy of `raw`; constant columns are 0"""

    @property
    def R(self) -> FloatArray:
        return self.scaled


def _eccentricity(G: nx.Graph) -> dict[int, int]:
    """Hop eccentricity within each node's connected component."""
    out: dict[int, int] = {}
    for component in nx.connected_components(G):
        out.update(nx.eccentricity(G.subgraph(component)))
    return out


def _gatekeeper(G: nx.Graph, node: int) -> int:
    """Connected components among the node's neighbours."""
    neighbours = list(G.neighbors(node))
    if not neighbours:
        return 0
    return nx.number_connected_components(G.subgraph(neighbours))


def raw_role_features(g: Graph) -> FloatArray:
    G = g.to_networkx()
    clustering = nx.clustering(G)
    eccentricity = _eccentricity(G)
    # Burt's constraint with p_ij = A_ij / Σ_k A_ik; undefined (NaN) when isolated
    constraint = nx.constraint(G, weight="weight")

    raw = np.zeros((g.n, len(ROLE_COLUMNS)), dtype=np.float64)
    for u in range(g.n):
        hole = constraint[u]
        raw[u] = (
            g.degree[u],
            g.weighted_degree[u],
            clustering[u],
            eccentricity[u],
            0.0 if np.isnan(hole) else hole,
            _gatekeeper(G, u),
        )
    return raw


def role_features(g: Graph) -> RoleMatrix:
    if g.n == 0:
        raise ValidationError("Cannot compute role features for an empty graph")
    raw = raw_role_features(g)
    scaled = MinMaxScaler(clip=True).fit_transform(raw)
    return RoleMatrix(raw=raw, scaled=np.asarray(scaled, dtype=np.float64))


def aggregate_edge_attributes(g: Graph, ea: EdgeAttributes) -> FloatArray:
    """Mean attribute vector over each node's incident edges; isolated nodes get 0."""
    total = np.zeros((g.n, ea.p), dtype=np.float64)
    for (u, v), vector in ea.rows.items():
        total[u] += vector
        total[v] += vector
    degree = np.maximum(g.degree, 1).astype(np.float64)
    return total / degree[:, None]


def save_role_features(path: str | pathlib.Path, rm: RoleMatrix) -> None:
    header = ",".join(
        ["node", *ROLE_COLUMNS, *(f"{name}_scaled" for name in ROLE_COLUMNS)]
    )
    nodes = np.arange(rm.raw.shape[0])[:, None]
    np.savetxt(
        path,
        np.hstack([nodes, rm.raw, rm.scaled]),
        delimiter=",",
        header=header,
        comments="",
        fmt=["%d"] + ["%.17g"] * (2 * len(ROLE_COLUMNS)),
    )
