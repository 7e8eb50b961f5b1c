import typing as t
from collections.abc import Mapping, Sequence

import numpy as np
import numpy.typing as npt
from sklearn.metrics import f1_score

from elaine_embed.errors import ContractViolation, ValidationError
from elaine_embed.graph import EdgeKey, FloatArray, IntArray

PREC_K_GRID = (2, 10, 100, 200, 300, 500, 800, 1000)


def rank_pairs(pairs: IntArray, scores: FloatArray) -> IntArray:
    """Order (u, v) rows by descending score, ties broken lexicographically."""
    order = np.lexsort((pairs[:, 1], pairs[:, 0], -scores))
    return pairs[order]


def precision_at_k(ranked: Sequence[EdgeKey] | IntArray, truth: set[EdgeKey], k: int) -> float:
    """|top-k ∩ truth| / k."""
    if k <= 0:
        raise ContractViolation(f"precision@k needs k >= 1, got {k}")
    if k > len(ranked):
        raise ContractViolation(f"k={k} exceeds the {len(ranked)} ranked candidates")
    hits = sum(1 for u, v in ranked[:k] if (int(u), int(v)) in truth)
    return hits / k


def precision_curve(
    ranked: Sequence[EdgeKey] | IntArray,
    truth: set[EdgeKey],
    ks: t.Iterable[int] = PREC_K_GRID,
) -> list[tuple[int, float]]:
    """precision@k for each k of the grid that fits the candidate count."""
    return [(k, precision_at_k(ranked, truth, k)) for k in ks if 1 <= k <= len(ranked)]


def average_precision(hits: Sequence[bool]) -> float:
    """Σ_k p@k · hit_k / #hits over a ranked hit sequence; 0 when nothing hits."""
    found = 0
    total = 0.0
    for rank, hit in enumerate(hits, start=1):
        if hit:
            found += 1
            total += found / rank
    return total / found if found else 0.0


def mean_average_precision(
    ranked: Mapping[int, Sequence[int]], truth: Mapping[int, set[int]]
) -> float:
    """Mean AP over nodes with at least one true partner; others are skipped."""
    contributing = [node for node in ranked if truth.get(node)]
    if not contributing:
        raise ValidationError("MAP undefined: no evaluation node has a held-out edge")
    scores = [
        average_precision([partner in truth[node] for partner in ranked[node]])
        for node in contributing
    ]
    return float(np.mean(scores))


def micro_macro_f1(
    y_true: npt.NDArray[np.int64], y_pred: npt.NDArray[np.int64]
) -> tuple[float, float]:
    """Pooled and per-label-averaged F1 of multi-label indicator matrices;
    labels with no true or predicted positives score 0."""
    if y_true.shape[1] == 1:
        # a single indicator column is read as a binary target, not multi-label
        f1 = f1_score(y_true[:, 0], y_pred[:, 0], average="binary", zero_division=0.0)
        return float(f1), float(f1)
    micro = f1_score(y_true, y_pred, average="micro", zero_division=0.0)
    macro = f1_score(y_true, y_pred, average="macro", zero_division=0.0)
    return float(micro), float(macro)
