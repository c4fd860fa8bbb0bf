"""The five evaluation measures, with explicit tie and degenerate rules.

Conventions (they matter for cross-implementation comparability, so they
are pinned here and tested against brute-force oracles):

- ranking_loss: per instance, the fraction of (positive, negative) label
  pairs with score(pos) <= score(neg); ties count as violations.
  Instances lacking a positive or lacking a negative are excluded from
  the mean entirely.
- average_precision: ranks are 1-based by descending score, ties broken
  by ascending label index; instances with no positive label are
  excluded.
- micro/macro F1: any 0/0 ratio is defined as 0.
- hamming/micro/macro operate on binarized predictions (score >= t,
  default t = 0.5); the two ranking measures use the raw scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import docfmt
from .errors import ArgumentError, UndefinedMetricError

METRIC_NAMES = (
    "hamming_loss",
    "ranking_loss",
    "average_precision",
    "micro_f1",
    "macro_f1",
)

DEFAULT_THRESHOLD = 0.5


@dataclass
class MetricReport:
    hamming_loss: float
    ranking_loss: float
    average_precision: float
    micro_f1: float
    macro_f1: float
    threshold_used: float
    n_instances: int
    n_labels: int

    def to_doc(self):
        pairs = [(name, getattr(self, name)) for name in METRIC_NAMES]
        pairs.append(("threshold", self.threshold_used))
        pairs.append(("n_instances", self.n_instances))
        pairs.append(("n_labels", self.n_labels))
        return docfmt.dumps(pairs)


def _binary_pair(pred, truth):
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.ndim != 2:
        raise ArgumentError(f"shape mismatch: pred {pred.shape}, truth {truth.shape}")
    return pred, truth


def _score_pair(scores, truth):
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if scores.shape != truth.shape or scores.ndim != 2:
        raise ArgumentError(f"shape mismatch: scores {scores.shape}, truth {truth.shape}")
    return scores, truth


def threshold_scores(scores, t=DEFAULT_THRESHOLD):
    """Binary predictions: 1 iff score >= t."""
    scores = np.asarray(scores, dtype=np.float64)
    return (scores >= t).astype(np.int64)


def hamming_loss(pred, truth):
    """Fraction of instance-label entries where pred != truth."""
    pred, truth = _binary_pair(pred, truth)
    return float((pred != truth).mean())


def ranking_loss(scores, truth):
    """Mean mis-ordered fraction of (positive, negative) pairs."""
    scores, truth = _score_pair(scores, truth)
    fractions = []
    for i in range(scores.shape[0]):
        pos = scores[i, truth[i] == 1.0]
        neg = scores[i, truth[i] != 1.0]
        if len(pos) == 0 or len(neg) == 0:
            continue
        violations = int((pos[:, None] <= neg[None, :]).sum())
        fractions.append(violations / (len(pos) * len(neg)))
    if not fractions:
        raise UndefinedMetricError(
            "ranking loss undefined: no instance has both a positive and a negative label"
        )
    return float(sum(fractions) / len(fractions))


def average_precision(scores, truth):
    """Mean precision at the rank of each positive label."""
    scores, truth = _score_pair(scores, truth)
    n, c = scores.shape
    per_instance = []
    for i in range(n):
        positives = np.flatnonzero(truth[i] == 1.0)
        if len(positives) == 0:
            continue
        # rank 1 = highest score; equal scores ordered by ascending index
        order = np.lexsort((np.arange(c), -scores[i]))
        rank_of = np.empty(c, dtype=np.int64)
        rank_of[order] = np.arange(1, c + 1)
        pos_ranks = np.sort(rank_of[positives])
        precisions = [(j + 1) / r for j, r in enumerate(pos_ranks)]
        per_instance.append(sum(precisions) / len(positives))
    if not per_instance:
        raise UndefinedMetricError(
            "average precision undefined: no instance has a positive label"
        )
    return float(sum(per_instance) / len(per_instance))


def _f1(tp, fp, fn):
    denom = 2.0 * tp + fp + fn
    if denom == 0.0:
        return 0.0
    return 2.0 * tp / denom


def micro_f1(pred, truth):
    """F1 over the pooled instance-label confusion counts."""
    pred, truth = _binary_pair(pred, truth)
    tp = float(((pred == 1.0) & (truth == 1.0)).sum())
    fp = float(((pred == 1.0) & (truth == 0.0)).sum())
    fn = float(((pred == 0.0) & (truth == 1.0)).sum())
    return _f1(tp, fp, fn)


def macro_f1(pred, truth):
    """Unweighted mean of per-label F1, with per-label 0/0 defined as 0."""
    pred, truth = _binary_pair(pred, truth)
    scores = []
    for j in range(pred.shape[1]):
        tp = float(((pred[:, j] == 1.0) & (truth[:, j] == 1.0)).sum())
        fp = float(((pred[:, j] == 1.0) & (truth[:, j] == 0.0)).sum())
        fn = float(((pred[:, j] == 0.0) & (truth[:, j] == 1.0)).sum())
        scores.append(_f1(tp, fp, fn))
    return float(sum(scores) / len(scores))


def evaluate(scores, truth, t=DEFAULT_THRESHOLD):
    """All five measures; binarizes with t where a metric needs decisions."""
    scores, truth = _score_pair(scores, truth)
    pred = threshold_scores(scores, t)
    return MetricReport(
        hamming_loss=hamming_loss(pred, truth),
        ranking_loss=ranking_loss(scores, truth),
        average_precision=average_precision(scores, truth),
        micro_f1=micro_f1(pred, truth),
        macro_f1=macro_f1(pred, truth),
        threshold_used=float(t),
        n_instances=int(truth.shape[0]),
        n_labels=int(truth.shape[1]),
    )
