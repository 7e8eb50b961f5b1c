import typing as t
from collections.abc import Iterable

import msgspec
import networkx as nx
import numpy as np
import numpy.typing as npt

from elaine_embed.errors import ValidationError
from elaine_embed.utils import array_fingerprint

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

EdgeKey = tuple[int, int]
"""Unordered edge key, always stored as (min, max)"""


def edge_key(u: int, v: int) -> EdgeKey:
    return (u, v) if u < v else (v, u)


def _frozen(array: npt.NDArray[t.Any]) -> npt.NDArray[t.Any]:
    array.flags.writeable = False
    return array


class Graph(msgspec.Struct, frozen=True):
    """Weighted undirected graph on dense node ids 0..n-1.

    Build with `Graph.from_adjacency` or `Graph.from_edges`; both validate the
    adjacency and fill the degree caches. Arrays are read-only.
    """

    adjacency: FloatArray
    degree: IntArray
    """Unweighted degree |{v : A_uv > 0}|"""
    weighted_degree: FloatArray
    """Sum of incident edge weights"""

    @classmethod
    def from_adjacency(cls, adjacency: npt.ArrayLike) -> t.Self:
        a = np.array(adjacency, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"Adjacency must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("Adjacency contains non-finite weights")
        if np.any(a < 0):
            raise ValidationError("Adjacency contains negative weights")
        if np.any(np.diag(a) != 0):
            raise ValidationError("Self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise ValidationError("Adjacency must be symmetric")

        degree = np.count_nonzero(a > 0, axis=1).astype(np.int64)
        weighted = a.sum(axis=1)
        return cls(
            adjacency=_frozen(a),
            degree=_frozen(degree),
            weighted_degree=_frozen(weighted),
        )

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> t.Self:
        """Symmetrise an edge list; repeated pairs in either order sum their weights."""
        a = np.zeros((n, n), dtype=np.float64)
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"Edge ({u}, {v}) outside node range 0..{n - 1}")
            if u == v:
                raise ValidationError(f"Self-loop on node {u}")
            if w <= 0:
                raise ValidationError(f"Edge ({u}, {v}) has non-positive weight {w}")
            a[u, v] += w
            a[v, u] += w
        return cls.from_adjacency(a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def m(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency, 1)))

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges as (u, v, w) with u < v, in lexicographic order."""
        us, vs = np.nonzero(np.triu(self.adjacency, 1))
        return [
            (int(u), int(v), float(self.adjacency[u, v])) for u, v in zip(us, vs)
        ]

    def edge_array(self) -> IntArray:
        """m×2 array of (u, v) with u < v, lexicographic."""
        us, vs = np.nonzero(np.triu(self.adjacency, 1))
        return np.stack([us, vs], axis=1).astype(np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u, v] > 0)

    def binary_adjacency(self) -> FloatArray:
        return (self.adjacency > 0).astype(np.float64)

    def to_networkx(self) -> nx.Graph:
        return nx.from_numpy_array(np.array(self.adjacency))

    def without_edges(self, removed: Iterable[EdgeKey]) -> "Graph":
        a = np.array(self.adjacency)
        for u, v in removed:
            a[u, v] = 0.0
            a[v, u] = 0.0
        return Graph.from_adjacency(a)

    def fingerprint(self) -> str:
        return array_fingerprint(self.adjacency)


class EdgeAttributes(msgspec.Struct, frozen=True):
    """One attribute vector of length `p` per graph edge."""

    p: int
    rows: dict[EdgeKey, FloatArray]
    missing: int = 0
    """Edges that had no attribute line and were filled with zeros"""

    @classmethod
    def build(
        cls, g: Graph, p: int, given: dict[EdgeKey, FloatArray]
    ) -> t.Self:
        rows: dict[EdgeKey, FloatArray] = {}
        missing = 0
        for u, v, _ in g.edges():
            vector = given.get((u, v))
            if vector is None:
                missing += 1
                vector = np.zeros(p, dtype=np.float64)
            rows[(u, v)] = _frozen(np.array(vector, dtype=np.float64))
        for u, v in given:
            if not g.has_edge(u, v):
                raise ValidationError(f"Attributes given for non-edge ({u}, {v})")
        for key, vector in rows.items():
            if vector.shape != (p,):
                raise ValidationError(
                    f"Edge {key} has attribute dimension {vector.shape}, expected {p}"
                )
            if not np.all(np.isfinite(vector)):
                raise ValidationError(f"Edge {key} has non-finite attribute values")
            if np.any(vector < 0) or np.any(vector > 1):
                raise ValidationError(f"Edge {key} has attribute values outside [0, 1]")
        return cls(p=p, rows=rows, missing=missing)

    @classmethod
    def empty(cls, g: Graph) -> t.Self:
        """Zero-dimensional attributes, for graphs without edge data."""
        return cls.build(g, 0, {})

    @property
    def m(self) -> int:
        return len(self.rows)

    def vector(self, u: int, v: int) -> FloatArray:
        return self.rows[edge_key(u, v)]

    def matrix(self, edges: IntArray) -> FloatArray:
        """Stack attribute rows for an array of (u, v) pairs."""
        if len(edges) == 0:
            return np.zeros((0, self.p), dtype=np.float64)
        return np.stack([self.vector(int(u), int(v)) for u, v in edges])

    def restrict(self, g: Graph) -> "EdgeAttributes":
        """Keep the rows of edges still present in `g`."""
        rows = {key: value for key, value in self.rows.items() if g.has_edge(*key)}
        return EdgeAttributes(p=self.p, rows=rows, missing=0)


class NodeLabels(msgspec.Struct, frozen=True):
    """Multi-label assignment; label ids are dense 0..num_labels-1."""

    labels: dict[int, frozenset[int]]
    num_labels: int

    @classmethod
    def build(cls, labels: dict[int, t.Iterable[int]]) -> t.Self:
        frozen = {node: frozenset(ls) for node, ls in labels.items()}
        used = set[int]().union(*frozen.values()) if frozen else set[int]()
        num_labels = max(used) + 1 if used else 0
        if used != set(range(num_labels)):
            gaps = sorted(set(range(num_labels)) - used)
            raise ValidationError(f"Label ids must be dense; missing {gaps}")
        return cls(labels=frozen, num_labels=num_labels)

    def of(self, node: int) -> frozenset[int]:
        return self.labels.get(node, frozenset())

    def indicator(self, nodes: t.Sequence[int] | IntArray) -> npt.NDArray[np.int64]:
        """len(nodes)×num_labels 0/1 matrix."""
        out = np.zeros((len(nodes), self.num_labels), dtype=np.int64)
        for row, node in enumerate(nodes):
            for label in self.of(int(node)):
                out[row, label] = 1
        return out

    def labelled_nodes(self) -> list[int]:
        return sorted(node for node, ls in self.labels.items() if ls)
