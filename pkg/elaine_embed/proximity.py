import pathlib
from concurrent.futures import ThreadPoolExecutor
from itertools import batched

import msgspec
import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field

from elaine_embed.errors import ValidationError
from elaine_embed.graph import FloatArray, Graph, IntArray
from elaine_embed.logger import logger
from elaine_embed.utils import derive_rng


class WalkConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    k: int = Field(default=10, ge=1, description="walks per node")
    l: int = Field(default=5, ge=1, description="walk length")  # noqa: E741
    seed: int = Field(default=0, ge=0)


class SimilarityMatrix(msgspec.Struct, frozen=True):
    S: FloatArray
    """Row i is the visit distribution of walks started at node i"""


class _Neighbourhoods:
    """CSR view of the binary adjacency used for uniform neighbour draws."""

    def __init__(self, g: Graph):
        self.degree: IntArray = np.array(g.degree, dtype=np.int64)
        self.offsets: IntArray = np.concatenate([[0], np.cumsum(self.degree)]).astype(
            np.int64
        )
        self.targets: IntArray = np.nonzero(g.adjacency > 0)[1].astype(np.int64)

    def walk(
        self, starts: IntArray, length: int, rng: np.random.Generator
    ) -> IntArray:
        """Advance one walk per start; returns len(starts)×length visited nodes."""
        visits = np.empty((len(starts), length), dtype=np.int64)
        current = starts
        for step in range(length):
            picks = rng.integers(0, self.degree[current])
            current = self.targets[self.offsets[current] + picks]
            visits[:, step] = current
        return visits


def random_walk(
    g: Graph, start: int, length: int, rng: np.random.Generator
) -> IntArray:
    """Uniform random walk of `length` steps from `start`; the start itself is not
    part of the sequence. Isolated starts give an empty sequence."""
    if g.degree[start] == 0:
        return np.empty(0, dtype=np.int64)
    return _Neighbourhoods(g).walk(np.array([start]), length, rng)[0]


def _similarity_rows(
    hood: _Neighbourhoods, nodes: tuple[int, ...], n: int, cfg: WalkConfig
) -> list[tuple[int, FloatArray]]:
    rows: list[tuple[int, FloatArray]] = []
    for node in nodes:
        if hood.degree[node] == 0:
            continue
        rng = derive_rng(cfg.seed, node)
        visits = hood.walk(np.full(cfg.k, node, dtype=np.int64), cfg.l, rng)
        counts = np.bincount(visits.ravel(), minlength=n)
        rows.append((node, counts / (cfg.k * cfg.l)))
    return rows


def build_similarity(g: Graph, cfg: WalkConfig, jobs: int = 1) -> SimilarityMatrix:
    """S_ij = visits of j over the k walks from i, divided by k·l."""
    if g.n == 0:
        raise ValidationError("Cannot build similarities for an empty graph")

    hood = _Neighbourhoods(g)
    chunk = max(1, -(-g.n // max(jobs, 1)))
    S = np.zeros((g.n, g.n), dtype=np.float64)
    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        for rows in pool.map(
            lambda nodes: _similarity_rows(hood, nodes, g.n, cfg),
            batched(range(g.n), chunk),
        ):
            for node, row in rows:
                S[node] = row
    logger.info(f"Built similarity matrix: n={g.n} k={cfg.k} l={cfg.l} seed={cfg.seed}")
    return SimilarityMatrix(S=S)


def cached_similarity(
    g: Graph, cfg: WalkConfig, cache_dir: str | pathlib.Path | None, jobs: int = 1
) -> SimilarityMatrix:
    """`build_similarity` backed by a `.npy` cache keyed by graph, k, l and seed."""
    if cache_dir is None:
        return build_similarity(g, cfg, jobs)

    path = pathlib.Path(cache_dir) / (
        f"S-{g.fingerprint()[:16]}-k{cfg.k}-l{cfg.l}-s{cfg.seed}.npy"
    )
    if path.exists():
        cached = np.load(path)
        if cached.shape == (g.n, g.n):
            logger.debug(f"Similarity cache hit: {path}")
            return SimilarityMatrix(S=cached)
        logger.warning(f"Ignoring similarity cache {path} with shape {cached.shape}")

    sim = build_similarity(g, cfg, jobs)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, sim.S)
    return sim


def transition_matrix(g: Graph) -> FloatArray:
    """Row-stochastic P = D^-1 A_binary; isolated rows stay zero."""
    binary = g.binary_adjacency()
    degree = np.maximum(g.degree, 1).astype(np.float64)
    return binary / degree[:, None]


def exact_visit_distribution(g: Graph, length: int) -> FloatArray:
    """Expected value of `build_similarity`: (1/length) Σ_{t=1..length} P^t."""
    P = transition_matrix(g)
    power = np.eye(g.n)
    total = np.zeros((g.n, g.n))
    for _ in range(length):
        power = power @ P
        total += power
    return total / length


def katz_index(g: Graph, beta_katz: float) -> FloatArray:
    """Σ_{t≥1} β^t A^t on the binary adjacency, as (I − βA)^-1 − I."""
    binary = g.binary_adjacency()
    if g.n == 0:
        return binary
    radius = float(np.max(np.abs(scipy.linalg.eigvalsh(binary))))
    if beta_katz <= 0 or beta_katz * radius >= 1:
        raise ValidationError(
            f"Katz decay {beta_katz} diverges for spectral radius {radius:.6g}"
        )
    identity = np.eye(g.n)
    K = scipy.linalg.solve(identity - beta_katz * binary, identity, assume_a="sym") - identity
    return (K + K.T) / 2


def common_neighbors(g: Graph) -> FloatArray:
    binary = g.binary_adjacency()
    cn = binary @ binary
    np.fill_diagonal(cn, 0.0)
    return cn
