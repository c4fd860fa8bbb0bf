"""Post-hoc interpretation of a trained selection matrix.

The diagonal magnitudes of B rank labels by how strongly they were kept
as landmarks; B A gives, per column, each landmark's weight in
reconstructing that label; co-occurrence counts over Y sanity-check that
selected landmarks actually drag their correlated labels along.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import docfmt
from .errors import ArgumentError, UndefinedMetricError

# default selection rule: keep labels within a factor 2 of the strongest diagonal
DEFAULT_THRESHOLD_FRACTION = 0.5


@dataclass
class LandmarkReport:
    ranked_labels: list  # (label name, |diagonal|) sorted non-increasing
    ranked_indices: list  # original label indices, same order
    selected: list  # selected label indices, ascending
    rule: dict  # {"top_k": int} or {"threshold": float}

    def to_doc(self):
        pairs = []
        kind, value = next(iter(self.rule.items()))
        pairs.append(("rule", kind))
        pairs.append((f"rule.{kind}", value))
        pairs.append(("n_selected", len(self.selected)))
        pairs.append(("selected_indices", " ".join(str(i) for i in self.selected)))
        for pos, ((name, mag), idx) in enumerate(
            zip(self.ranked_labels, self.ranked_indices)
        ):
            pairs.append((f"rank{pos}.label", name))
            pairs.append((f"rank{pos}.index", idx))
            pairs.append((f"rank{pos}.magnitude", mag))
        return docfmt.dumps(pairs)


def _validate_rule(rule, c):
    if rule is None or not isinstance(rule, dict) or len(rule) != 1:
        raise ArgumentError("rule must be {'top_k': count} or {'threshold': value}")
    kind, value = next(iter(rule.items()))
    if kind == "top_k":
        if not 0 <= value <= c:
            raise ArgumentError(f"top_k must be in [0, {c}], got {value}")
    elif kind == "threshold":
        value = float(value)
    else:
        raise ArgumentError(f"unknown selection rule {kind!r}")
    return kind, value


def select_landmarks(B, rule=None, label_names=None):
    """Rank labels by |B_ii| and select by top-k or threshold.

    Without an explicit rule, selects everything within
    DEFAULT_THRESHOLD_FRACTION of the largest diagonal magnitude. Ties
    rank by ascending label index, so the result is deterministic.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ArgumentError(f"B must be square, got shape {B.shape}")
    c = B.shape[0]
    if label_names is None:
        label_names = [f"label{j:02d}" for j in range(c)]
    if len(label_names) != c:
        raise ArgumentError(f"{len(label_names)} names for {c} labels")

    magnitudes = np.abs(np.diag(B))
    if rule is None:
        rule = {"threshold": DEFAULT_THRESHOLD_FRACTION * float(magnitudes.max())}
    kind, value = _validate_rule(rule, c)

    order = np.lexsort((np.arange(c), -magnitudes))
    if kind == "top_k":
        selected = sorted(int(i) for i in order[:value])
    else:
        selected = sorted(int(i) for i in np.flatnonzero(magnitudes >= value))
    return LandmarkReport(
        ranked_labels=[(label_names[i], float(magnitudes[i])) for i in order],
        ranked_indices=[int(i) for i in order],
        selected=selected,
        rule={kind: value},
    )


def cooccurrence(Y, i, j):
    """Conditional co-occurrence of label j given label i.

    Returns (count of rows with both, count of rows with i, P(j|i)).
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise ArgumentError("Y must be a 2-d binary matrix")
    c = Y.shape[1]
    if not (0 <= i < c and 0 <= j < c):
        raise ArgumentError(f"label indices must be in [0, {c}), got ({i}, {j})")
    if i == j:
        raise ArgumentError("co-occurrence requires two distinct labels")
    has_i = Y[:, i] == 1.0
    count_i = int(has_i.sum())
    if count_i == 0:
        raise UndefinedMetricError(f"label {i} never occurs; P(j|i) undefined")
    count_both = int((has_i & (Y[:, j] == 1.0)).sum())
    return count_both, count_i, count_both / count_i


def recovery_weights(B, A):
    """B A: column j holds each landmark's contribution to recovering
    label j."""
    B = np.asarray(B, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    if B.shape != A.shape or B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ArgumentError(f"B {B.shape} and A {A.shape} must be equal square matrices")
    return B @ A


def diagonal_csv(B, label_names=None):
    """B's diagonal as ``index,label,magnitude`` rows, for external plotting."""
    B = np.asarray(B, dtype=np.float64)
    c = B.shape[0]
    if label_names is None:
        label_names = [f"label{j:02d}" for j in range(c)]
    lines = ["index,label,diagonal"]
    for jdx in range(c):
        lines.append(f"{jdx},{label_names[jdx]},{float(B[jdx, jdx])!r}")
    return "\n".join(lines) + "\n"


def matrix_csv(M, label_names=None):
    """A square label-by-label matrix as CSV with a label header column."""
    M = np.asarray(M, dtype=np.float64)
    c = M.shape[0]
    if label_names is None:
        label_names = [f"label{j:02d}" for j in range(c)]
    lines = ["label," + ",".join(label_names)]
    for idx in range(c):
        lines.append(label_names[idx] + "," + ",".join(repr(float(v)) for v in M[idx]))
    return "\n".join(lines) + "\n"


def cooccurrence_csv(Y, label_names):
    """All ordered label pairs with P(j|i); pairs with count_i = 0 are
    skipped."""
    Y = np.asarray(Y, dtype=np.float64)
    c = Y.shape[1]
    lines = ["label_i,label_j,count_both,count_i,p_j_given_i"]
    for i in range(c):
        for j in range(c):
            if i == j:
                continue
            try:
                both, count_i, p = cooccurrence(Y, i, j)
            except UndefinedMetricError:
                continue
            lines.append(f"{label_names[i]},{label_names[j]},{both},{count_i},{p!r}")
    return "\n".join(lines) + "\n"
