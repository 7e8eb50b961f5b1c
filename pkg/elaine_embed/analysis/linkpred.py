import asyncio
import typing as t
from collections import defaultdict

import msgspec
import numpy as np
from neverraise import Err, Ok

from elaine_embed.analysis.metrics import (
    PREC_K_GRID,
    mean_average_precision,
    precision_curve,
    rank_pairs,
)
from elaine_embed.analysis.report import EvalReport, MetricSummary, PrecisionPoint
from elaine_embed.analysis.splits import LinkPredSplit, make_split
from elaine_embed.errors import ValidationError
from elaine_embed.graph import EdgeAttributes, EdgeKey, FloatArray, Graph, IntArray
from elaine_embed.logger import logger
from elaine_embed.model import ElaineConfig, PathLike, embed, score_matrix, train
from elaine_embed.utils import batch_calls_result_async, derive_rng, run_in_thread

PairScorer = t.Callable[[LinkPredSplit, EdgeAttributes], FloatArray]
"""Maps a split (and the full edge attributes) to an n×n pair-score matrix"""


class ElaineScorer:
    """Trains ELAINE on the split's training graph and scores with the
    reconstructed neighbourhood block."""

    def __init__(self, cfg: ElaineConfig, cache_dir: PathLike | None = None):
        self.cfg = cfg
        self.cache_dir = cache_dir

    def __call__(self, split: LinkPredSplit, ea: EdgeAttributes) -> FloatArray:
        train_ea = ea.restrict(split.train_graph)
        result = train(split.train_graph, train_ea, self.cfg, cache_dir=self.cache_dir)
        emb = embed(result.model, result.features)
        return score_matrix(result.model, emb.Y)


def random_scorer(seed: int) -> PairScorer:
    """Uniform random scores, reproducible per (seed, split seed)."""

    def score(split: LinkPredSplit, ea: EdgeAttributes) -> FloatArray:
        n = split.train_graph.n
        noise = derive_rng(seed, split.seed).random((n, n))
        return np.triu(noise, 1) + np.triu(noise, 1).T

    return score


class RepeatResult(msgspec.Struct, frozen=True):
    seed: int
    split_fingerprint: str
    precision: list[tuple[int, float]]
    map: float


def candidate_pairs(split: LinkPredSplit) -> IntArray:
    """Unordered pairs among evaluation nodes that are not training edges."""
    nodes = split.eval_nodes
    us, vs = np.triu_indices(len(nodes), k=1)
    pairs = np.stack([nodes[us], nodes[vs]], axis=1)
    keep = split.train_graph.adjacency[pairs[:, 0], pairs[:, 1]] == 0
    return pairs[keep]


def held_out_truth(split: LinkPredSplit) -> set[EdgeKey]:
    """Held-out edges with both endpoints among the evaluation nodes."""
    in_eval = set(int(u) for u in split.eval_nodes)
    return {(u, v) for u, v in split.held_out if u in in_eval and v in in_eval}


def expected_random_ap(relevant: int, candidates: int) -> float:
    """Mean AP over all orderings of `candidates` items, `relevant` of them true."""
    if not 1 <= relevant <= candidates:
        raise ValidationError(f"Need 1 <= relevant <= candidates, got {relevant}, {candidates}")
    if candidates == 1:
        return 1.0
    harmonic = float(np.sum(1.0 / np.arange(1, candidates + 1)))
    return (
        (relevant - 1) / (candidates - 1) * (candidates - harmonic) + harmonic
    ) / candidates


def expected_random_map(split: LinkPredSplit) -> float:
    """Expected MAP of `random_scorer` on `split`, in closed form."""
    pairs = candidate_pairs(split)
    candidates = np.bincount(pairs.ravel(), minlength=split.train_graph.n)
    relevant: dict[int, int] = defaultdict(int)
    for u, v in held_out_truth(split):
        relevant[u] += 1
        relevant[v] += 1
    if not relevant:
        raise ValidationError("MAP undefined: no evaluation node has a held-out edge")
    return float(
        np.mean([expected_random_ap(r, int(candidates[node])) for node, r in relevant.items()])
    )


def evaluate_scores(split: LinkPredSplit, scores: FloatArray) -> RepeatResult:
    pairs = candidate_pairs(split)
    truth = held_out_truth(split)
    pair_scores = scores[pairs[:, 0], pairs[:, 1]]
    ranked = rank_pairs(pairs, pair_scores)
    curve = precision_curve(ranked, truth, PREC_K_GRID)

    per_node: dict[int, list[tuple[float, int]]] = defaultdict(list)
    for (u, v), score in zip(pairs.tolist(), pair_scores.tolist()):
        per_node[u].append((-score, v))
        per_node[v].append((-score, u))
    node_truth: dict[int, set[int]] = defaultdict(set)
    for u, v in truth:
        node_truth[u].add(v)
        node_truth[v].add(u)
    node_ranked = {
        node: [partner for _, partner in sorted(entries)]
        for node, entries in per_node.items()
    }
    return RepeatResult(
        seed=split.seed,
        split_fingerprint=split.fingerprint(),
        precision=curve,
        map=mean_average_precision(node_ranked, node_truth),
    )


def _run_repeat(
    g: Graph,
    ea: EdgeAttributes,
    scorer: PairScorer,
    seed: int,
    holdout_frac: float,
    max_eval_nodes: int,
) -> RepeatResult:
    split = make_split(g, holdout_frac, max_eval_nodes, seed)
    result = evaluate_scores(split, scorer(split, ea))
    logger.info(f"Repeat seed={seed}: MAP={result.map:.4f}")
    return result


def summarize(results: list[RepeatResult], failures: list[str]) -> EvalReport:
    ks = sorted({k for r in results for k, _ in r.precision})
    points = [
        PrecisionPoint(
            k=k,
            summary=MetricSummary.of([v for r in results for kk, v in r.precision if kk == k]),
        )
        for k in ks
    ]
    return EvalReport(
        precision_at_k=points,
        map=MetricSummary.of([r.map for r in results]),
        repeats=len(results),
        failures=failures,
        split_fingerprints=[r.split_fingerprint for r in results],
    )


def run_link_prediction(
    g: Graph,
    ea: EdgeAttributes,
    cfg: ElaineConfig,
    repeats: int = 5,
    holdout_frac: float = 0.2,
    max_eval_nodes: int = 1024,
    scorer: PairScorer | None = None,
    jobs: int = 1,
    cache_dir: PathLike | None = None,
) -> EvalReport:
    """Repeat hide-edges / train / rank over splits seeded cfg.seed + i."""
    if repeats < 1:
        raise ValidationError(f"repeats must be >= 1, got {repeats}")
    scorer = scorer if scorer is not None else ElaineScorer(cfg, cache_dir)
    params = [
        (g, ea, scorer, cfg.seed + i, holdout_frac, max_eval_nodes) for i in range(repeats)
    ]
    outcomes = asyncio.run(
        batch_calls_result_async(
            params,
            lambda *args: run_in_thread(_run_repeat, *args, on_error=lambda e: e),
            batch_size=jobs,
        )
    )

    results: list[RepeatResult] = []
    errors: list[Exception] = []
    for outcome in outcomes:
        # fmt: off
        match outcome:
            case Ok(result): results.append(result)  # noqa: E701
            case Err(e): errors.append(e)  # noqa: E701
        # fmt: on
    for e in errors:
        logger.warning(f"Link-prediction repeat failed: {e!r}")
    if not results:
        raise errors[0]
    return summarize(results, [repr(e) for e in errors])
