"""Mulan-style multi-label dataset handling.

Datasets arrive as an ARFF instance file plus an XML header that names the
label attributes; every other attribute is a feature. Both dense
(``v1,v2,...``) and sparse (``{index value, ...}``, 0-based indices) ARFF
rows are accepted. Labels are located by *name* match against the XML
header rather than by column position, because the attribute order is not
consistent across the public files.

Also provides deterministic k-fold assignment, feature standardization
with reusable statistics (fit on training folds only, to avoid leakage),
and a synthetic generator that plants a known landmark structure: landmark
labels are thresholded linear functions of the features, every other label
is a boolean OR/AND of one or two landmark labels.
"""

from __future__ import annotations

import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ParseError, SchemaError, ValidationError

_NUMERIC_TYPES = ("numeric", "real", "integer")


@dataclass
class MultiLabelDataset:
    """Feature matrix X (N x D) and binary label matrix Y (N x C)."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    label_names: list[str]

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.float64)
        if self.features.ndim != 2 or self.labels.ndim != 2:
            raise ValidationError("features and labels must be 2-d matrices")
        n, d = self.features.shape
        n2, c = self.labels.shape
        if n != n2:
            raise ValidationError(f"row count mismatch: {n} feature rows, {n2} label rows")
        if n < 1 or d < 1:
            raise ValidationError("need at least one instance and one feature")
        if c < 2:
            raise ValidationError(f"need at least two labels, got {c}")
        if len(self.feature_names) != d:
            raise ValidationError(f"{len(self.feature_names)} feature names for {d} features")
        if len(self.label_names) != c:
            raise ValidationError(f"{len(self.label_names)} label names for {c} labels")
        if not np.isfinite(self.features).all():
            raise ValidationError("features contain non-finite values")
        if not np.isin(self.labels, (0.0, 1.0)).all():
            raise ValidationError("labels must contain only 0 and 1")

    @property
    def n_instances(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_labels(self):
        return self.labels.shape[1]

    def subset(self, index):
        """Row subset (copy); used for fold splits."""
        return MultiLabelDataset(
            self.features[index].copy(),
            self.labels[index].copy(),
            list(self.feature_names),
            list(self.label_names),
        )


@dataclass
class FoldAssignment:
    """Maps each instance to a fold index in [0, k)."""

    fold_of_instance: np.ndarray
    k: int

    def __post_init__(self):
        self.fold_of_instance = np.asarray(self.fold_of_instance, dtype=np.int64)
        counts = np.bincount(self.fold_of_instance, minlength=self.k)
        if len(counts) > self.k or (counts == 0).any():
            raise ValidationError("every fold index in [0, k) must appear")
        if counts.max() - counts.min() > 1:
            raise ValidationError("fold sizes may differ by at most 1")

    def test_indices(self, fold):
        return np.flatnonzero(self.fold_of_instance == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.fold_of_instance != fold)

    def to_csv(self):
        lines = ["instance_index,fold"]
        lines += [f"{i},{f}" for i, f in enumerate(self.fold_of_instance)]
        return "\n".join(lines) + "\n"


@dataclass
class SynthesisConfig:
    n_instances: int = 200
    n_features: int = 10
    n_labels: int = 6
    n_landmarks: int = 2
    noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_instances < 1 or self.n_features < 1:
            raise ArgumentError("need at least one instance and one feature")
        if self.n_labels < 2:
            raise ArgumentError("need at least two labels")
        if not 1 <= self.n_landmarks < self.n_labels:
            raise ArgumentError(
                f"n_landmarks must be in [1, n_labels), got {self.n_landmarks} of {self.n_labels}"
            )
        if not 0.0 <= self.noise_rate < 0.5:
            raise ArgumentError(f"noise_rate must be in [0, 0.5), got {self.noise_rate}")


@dataclass
class FeatureScaler:
    """Per-column center/scale statistics, reusable on held-out data.

    Population (1/N) standard deviation convention. Columns whose stddev is
    below 1e-12 are mapped to all zeros rather than divided by noise.
    """

    mean: np.ndarray
    std: np.ndarray
    degenerate_tol: float = 1e-12
    inverse_scale: np.ndarray = field(init=False)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        degenerate = self.std < self.degenerate_tol
        safe = np.where(degenerate, 1.0, self.std)
        self.inverse_scale = np.where(degenerate, 0.0, 1.0 / safe)

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.mean.shape[0]:
            raise ArgumentError(
                f"scaler fitted on {self.mean.shape[0]} features, got {X.shape[1]}"
            )
        return (X - self.mean) * self.inverse_scale


def parse_label_header(xml_text):
    """Extract label names, in document order, from a Mulan XML header."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line = exc.position[0] if exc.position else None
        raise ParseError(f"malformed XML header: {exc}", line=line) from exc
    if _strip_ns(root.tag) != "labels":
        raise SchemaError(f"expected a <labels> root element, got <{_strip_ns(root.tag)}>")
    names = []
    for child in root:
        if _strip_ns(child.tag) != "label":
            continue
        name = child.get("name")
        if name is None:
            raise ValidationError("<label> element without a name attribute")
        names.append(name)
    if len(names) < 2:
        raise ValidationError(f"need at least two labels, header declares {len(names)}")
    if any(not n for n in names):
        raise ValidationError("empty label name in header")
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ValidationError(f"duplicate label names in header: {dupes}")
    return names


def _strip_ns(tag):
    return tag.rsplit("}", 1)[-1]


def _unquote(token):
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    return token


def _parse_attribute_decl(line, lineno):
    """Parse ``@attribute <name> <type>``; returns (name, type_spec)."""
    rest = line[len("@attribute"):].strip()
    if not rest:
        raise ParseError("@attribute without a name", line=lineno)
    if rest[0] in "'\"":
        quote = rest[0]
        end = rest.find(quote, 1)
        if end < 0:
            raise ParseError("unterminated quoted attribute name", line=lineno)
        name = rest[1:end]
        type_spec = rest[end + 1:].strip()
    else:
        parts = rest.split(None, 1)
        if len(parts) != 2:
            raise ParseError(f"@attribute missing a type: {line!r}", line=lineno)
        name, type_spec = parts[0], parts[1].strip()
    if not name:
        raise ParseError("empty attribute name", line=lineno)
    return name, type_spec


def parse_arff(arff_text, label_names):
    """Parse ARFF text into a dataset, splitting attributes by label name.

    Features are all non-label attributes in declaration order; label
    columns are returned in ``label_names`` order regardless of where they
    appear in the file. Missing values (``?``) are a hard parse error.
    """
    if len(label_names) != len(set(label_names)):
        raise ArgumentError("label_names must be unique")
    label_set = set(label_names)

    attrs = []  # (name, type_spec, lineno)
    data_rows = []  # (lineno, text)
    in_data = False

    for lineno, raw in enumerate(io.StringIO(arff_text), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        lower = line.lower()
        if in_data:
            data_rows.append((lineno, line))
        elif lower.startswith("@relation"):
            continue
        elif lower.startswith("@attribute"):
            name, type_spec = _parse_attribute_decl(line, lineno)
            if any(name == seen for seen, _, _ in attrs):
                raise SchemaError(f"duplicate attribute name {name!r}")
            attrs.append((name, type_spec, lineno))
        elif lower.startswith("@data"):
            in_data = True
        else:
            raise ParseError(f"unrecognized header line: {line!r}", line=lineno)

    attr_names = [name for name, _, _ in attrs]
    missing = [n for n in label_names if n not in attr_names]
    if missing:
        raise SchemaError(f"label attributes missing from ARFF: {missing}")
    attr_is_label = [name in label_set for name in attr_names]
    for (name, type_spec, lineno), is_label in zip(attrs, attr_is_label):
        if not is_label and not type_spec.lower().startswith(_NUMERIC_TYPES):
            if not type_spec.startswith("{"):
                raise ParseError(
                    f"feature attribute {name!r} has unsupported type {type_spec!r}; "
                    "only numeric features are supported",
                    line=lineno,
                )
            raise ParseError(
                f"nominal attribute {name!r} is not declared as a label",
                line=lineno,
            )
    if not data_rows:
        raise ValidationError("ARFF declares no data rows")
    n_attrs = len(attr_names)
    feature_cols = [i for i, is_l in enumerate(attr_is_label) if not is_l]
    if not feature_cols:
        raise ValidationError("ARFF has no feature attributes")
    label_col_of = {attr_names[i]: i for i, is_l in enumerate(attr_is_label) if is_l}

    values = np.zeros((len(data_rows), n_attrs), dtype=np.float64)
    for r, (lineno, line) in enumerate(data_rows):
        if line.startswith("{"):
            _parse_sparse_row(line, lineno, n_attrs, values[r])
        else:
            _parse_dense_row(line, lineno, n_attrs, values[r])

    for name, col in label_col_of.items():
        bad = ~np.isin(values[:, col], (0.0, 1.0))
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ValidationError(
                f"label {name!r} has value {values[row, col]:g} outside {{0,1}} "
                f"(data row {row})"
            )

    features = values[:, feature_cols]
    labels = np.column_stack([values[:, label_col_of[n]] for n in label_names])
    feature_names = [attr_names[i] for i in feature_cols]
    return MultiLabelDataset(features, labels, feature_names, list(label_names))


def _parse_scalar(token, lineno):
    token = _unquote(token)
    if token == "?":
        raise ParseError("missing values ('?') are not supported", line=lineno)
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"non-numeric value {token!r}", line=lineno) from None


def _parse_dense_row(line, lineno, n_attrs, out):
    tokens = line.split(",")
    if len(tokens) != n_attrs:
        raise ParseError(
            f"expected {n_attrs} values, got {len(tokens)}", line=lineno
        )
    for i, tok in enumerate(tokens):
        out[i] = _parse_scalar(tok, lineno)


def _parse_sparse_row(line, lineno, n_attrs, out):
    if not line.endswith("}"):
        raise ParseError("unterminated sparse row", line=lineno)
    body = line[1:-1].strip()
    if not body:
        return
    seen = set()
    for entry in body.split(","):
        parts = entry.split()
        if len(parts) != 2:
            raise ParseError(f"bad sparse entry {entry.strip()!r}", line=lineno)
        try:
            idx = int(parts[0])
        except ValueError:
            raise ParseError(f"bad sparse index {parts[0]!r}", line=lineno) from None
        if not 0 <= idx < n_attrs:
            raise ParseError(f"sparse index {idx} out of range [0, {n_attrs})", line=lineno)
        if idx in seen:
            raise ParseError(f"duplicate sparse index {idx}", line=lineno)
        seen.add(idx)
        out[idx] = _parse_scalar(parts[1], lineno)


def _quote_if_needed(name):
    if any(ch.isspace() for ch in name) or "," in name or "%" in name:
        return "'" + name.replace("'", "\\'") + "'"
    return name


def serialize_arff(ds, relation="dataset"):
    """Render a dataset as dense ARFF (features first, then labels).

    Feature values are written with repr(), which round-trips float64
    exactly, so parse(serialize(ds)) reproduces the matrices bit-for-bit.
    """
    out = [f"@relation {_quote_if_needed(relation)}", ""]
    for name in ds.feature_names:
        out.append(f"@attribute {_quote_if_needed(name)} numeric")
    for name in ds.label_names:
        out.append(f"@attribute {_quote_if_needed(name)} {{0,1}}")
    out.append("")
    out.append("@data")
    for i in range(ds.n_instances):
        feats = ",".join(repr(float(v)) for v in ds.features[i])
        labs = ",".join(str(int(v)) for v in ds.labels[i])
        out.append(feats + "," + labs)
    return "\n".join(out) + "\n"


def serialize_label_header(label_names):
    out = ['<?xml version="1.0" encoding="utf-8"?>']
    out.append('<labels xmlns="http://mulan.sourceforge.net/labels">')
    for name in label_names:
        escaped = (
            name.replace("&", "&amp;").replace("<", "&lt;").replace('"', "&quot;")
        )
        out.append(f'  <label name="{escaped}"></label>')
    out.append("</labels>")
    return "\n".join(out) + "\n"


def load_dataset(arff_path, xml_path):
    """Read the two Mulan files from disk."""
    try:
        xml_text = open(xml_path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ArgumentError(f"cannot read label header {xml_path}: {exc}") from exc
    try:
        arff_text = open(arff_path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ArgumentError(f"cannot read ARFF file {arff_path}: {exc}") from exc
    return parse_arff(arff_text, parse_label_header(xml_text))


def label_cardinality(ds):
    """Mean number of positive labels per instance."""
    return float(ds.labels.sum() / ds.n_instances)


def standardize_features(ds):
    """Center/scale each feature column to mean 0, population stddev 1.

    Returns the transformed dataset and the fitted scaler so the identical
    transform can be applied to held-out data.
    """
    mean = ds.features.mean(axis=0)
    std = ds.features.std(axis=0)  # population (1/N) convention
    scaler = FeatureScaler(mean, std)
    out = MultiLabelDataset(
        scaler.transform(ds.features), ds.labels.copy(),
        list(ds.feature_names), list(ds.label_names),
    )
    return out, scaler


def split_folds(n, k, seed):
    """Deterministic k-fold assignment with fold sizes differing by <= 1."""
    if k < 2:
        raise ArgumentError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ArgumentError(f"cannot split {n} instances into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    fold_of_instance = np.empty(n, dtype=np.int64)
    fold_of_instance[perm] = np.arange(n) % k
    return FoldAssignment(fold_of_instance, k)


def synthesize(cfg):
    """Generate a dataset with a planted landmark structure.

    Landmark labels are thresholded linear scores of Gaussian features, so
    a trained embedding can predict them. Every non-landmark label is a
    boolean OR/AND of two planted landmarks (or a copy, when only one
    landmark exists), so the full label set is recoverable from the
    landmark columns but the landmarks are not recoverable from the
    derived columns. Each bit is then flipped independently with
    probability ``noise_rate``.

    Returns (dataset, sorted planted landmark indices).
    """
    rng = np.random.default_rng(cfg.seed)
    n, d, c, m = cfg.n_instances, cfg.n_features, cfg.n_labels, cfg.n_landmarks

    X = rng.standard_normal((n, d))
    landmark_idx = np.sort(rng.choice(c, size=m, replace=False))
    W = rng.standard_normal((d, m)) / np.sqrt(d)
    scores = X @ W
    Y = np.zeros((n, c), dtype=np.float64)
    Y[:, landmark_idx] = (scores >= 0.0).astype(np.float64)

    non_landmarks = [j for j in range(c) if j not in set(landmark_idx.tolist())]
    for j in non_landmarks:
        if m == 1:
            Y[:, j] = Y[:, landmark_idx[0]]
            continue
        a, b = rng.choice(m, size=2, replace=False)
        ya = Y[:, landmark_idx[a]]
        yb = Y[:, landmark_idx[b]]
        if rng.random() < 0.5:
            Y[:, j] = np.maximum(ya, yb)  # OR
        else:
            Y[:, j] = ya * yb  # AND

    if cfg.noise_rate > 0.0:
        flips = rng.random((n, c)) < cfg.noise_rate
        Y = np.abs(Y - flips.astype(np.float64))

    feature_names = [f"f{i:03d}" for i in range(d)]
    label_names = [f"label{j:02d}" for j in range(c)]
    ds = MultiLabelDataset(X, Y, feature_names, label_names)
    return ds, landmark_idx
