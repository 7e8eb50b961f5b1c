import math
import typing as t

import msgspec
import numpy as np
import numpy.typing as npt
from sklearn.linear_model import LogisticRegression

from elaine_embed.analysis.metrics import micro_macro_f1
from elaine_embed.errors import ValidationError
from elaine_embed.graph import FloatArray, NodeLabels
from elaine_embed.logger import logger
from elaine_embed.model import Embedding

SPLIT_ATTEMPTS = 10
TRAIN_RATIOS = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


class ClassificationScores(msgspec.Struct, frozen=True):
    micro_f1: float
    macro_f1: float
    train_ratio: float
    seed: int


class ClassificationRow(msgspec.Struct, frozen=True):
    train_ratio: float
    micro_mean: float
    micro_std: float
    macro_mean: float
    macro_std: float
    repeats: int


def one_vs_rest_probabilities(
    X_train: FloatArray, Y_train: npt.NDArray[np.int64], X_test: FloatArray
) -> FloatArray:
    """Per-label binary L2 logistic regression; labels constant in training
    predict that constant."""
    probs = np.zeros((X_test.shape[0], Y_train.shape[1]))
    for label in range(Y_train.shape[1]):
        y = Y_train[:, label]
        if y.min() == y.max():
            probs[:, label] = float(y[0])
            continue
        clf = LogisticRegression(C=1.0, tol=1e-6, max_iter=2000)
        _ = clf.fit(X_train, y)
        probs[:, label] = clf.predict_proba(X_test)[:, 1]
    return probs


def decide_labels(probs: FloatArray) -> npt.NDArray[np.int64]:
    """Every label above 0.5, or the single most likely label when none is."""
    pred = (probs > 0.5).astype(np.int64)
    empty = pred.sum(axis=1) == 0
    pred[empty, np.argmax(probs[empty], axis=1)] = 1
    return pred


def _split(
    Y: npt.NDArray[np.int64], train_ratio: float, seed: int
) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    count = len(Y)
    n_train = min(max(math.floor(count * train_ratio + 0.5), 1), count - 1)
    for attempt in range(SPLIT_ATTEMPTS):
        perm = np.random.default_rng(seed + attempt).permutation(count)
        train, test = perm[:n_train], perm[n_train:]
        if Y[train].sum(axis=0).min(initial=1) >= 1:
            return train, test
        logger.warning(
            f"Split seed {seed + attempt} leaves a label without training nodes; re-drawing"
        )
    raise ValidationError(
        f"No split with ratio {train_ratio} covers every label after {SPLIT_ATTEMPTS} draws"
    )


def node_classification(
    emb: Embedding, labels: NodeLabels, train_ratio: float, seed: int
) -> ClassificationScores:
    """Train one-vs-rest classifiers on a random share of the labelled nodes and
    score the rest."""
    if not 0.0 < train_ratio < 1.0:
        raise ValidationError(f"train_ratio must lie in (0, 1), got {train_ratio}")
    nodes = np.array(labels.labelled_nodes(), dtype=np.int64)
    if len(nodes) < 2 or labels.num_labels == 0:
        raise ValidationError("Node classification needs at least two labelled nodes")

    X = emb.Y[nodes]
    Y = labels.indicator(nodes)
    train, test = _split(Y, train_ratio, seed)
    probs = one_vs_rest_probabilities(X[train], Y[train], X[test])
    micro, macro = micro_macro_f1(Y[test], decide_labels(probs))
    return ClassificationScores(
        micro_f1=micro, macro_f1=macro, train_ratio=train_ratio, seed=seed
    )


def run_node_classification(
    emb: Embedding,
    labels: NodeLabels,
    train_ratios: t.Sequence[float] = TRAIN_RATIOS,
    repeats: int = 5,
    seed: int = 0,
) -> list[ClassificationRow]:
    rows: list[ClassificationRow] = []
    for ratio in train_ratios:
        scores = [
            node_classification(emb, labels, ratio, seed + i * SPLIT_ATTEMPTS)
            for i in range(repeats)
        ]
        micro = np.array([s.micro_f1 for s in scores])
        macro = np.array([s.macro_f1 for s in scores])
        rows.append(
            ClassificationRow(
                train_ratio=ratio,
                micro_mean=float(micro.mean()),
                micro_std=float(micro.std()),
                macro_mean=float(macro.mean()),
                macro_std=float(macro.std()),
                repeats=repeats,
            )
        )
        logger.info(
            f"train_ratio={ratio:.2f}: micro-F1={micro.mean():.4f} macro-F1={macro.mean():.4f}"
        )
    return rows
