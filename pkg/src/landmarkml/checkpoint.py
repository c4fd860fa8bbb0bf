"""Self-describing text checkpoints.

A checkpoint is a flat header (format version, variant, slope, whether
features were standardized) followed by named tensors; each tensor is a
``tensor=<name> <dim0> [dim1]`` line and its row-major values, one
matrix row (or the whole vector) per line. Values are written with
repr(), which round-trips float64 exactly: save -> load reproduces
predictions bit-for-bit, and identical models serialize to identical
bytes.

Stored tensors: the embedding layers (W1/b1, ...), the selection matrix
B, the correlation matrix A, and (when standardization was on) the
feature means and stddevs needed to transform held-out data.
"""

from __future__ import annotations

import numpy as np

from . import embedding
from .data import FeatureScaler
from .errors import ParseError, SchemaError
from .trainer import ModelState

FORMAT_VERSION = 1
MAGIC = "landmarkml-checkpoint"


def _tensor_lines(name, T):
    T = np.asarray(T, dtype=np.float64)
    dims = " ".join(str(d) for d in T.shape)
    lines = [f"tensor={name} {dims}"]
    rows = T.reshape(1, -1) if T.ndim == 1 else T
    for row in rows:
        lines.append(" ".join(repr(float(v)) for v in row))
    return lines


def dumps(state, scaler=None):
    """Serialize a ModelState (+ optional FeatureScaler) to checkpoint text."""
    theta = state.theta
    lines = [
        MAGIC,
        f"format_version={FORMAT_VERSION}",
        f"variant={theta.variant}",
        f"leaky_slope={theta.leaky_slope!r}",
        f"n_layers={len(theta.weights)}",
        f"standardized={1 if scaler is not None else 0}",
    ]
    for i, (W, b) in enumerate(zip(theta.weights, theta.biases), start=1):
        lines += _tensor_lines(f"W{i}", W)
        lines += _tensor_lines(f"b{i}", b)
    lines += _tensor_lines("B", state.B)
    lines += _tensor_lines("A", state.A)
    if scaler is not None:
        lines += _tensor_lines("feat_mean", scaler.mean)
        lines += _tensor_lines("feat_std", scaler.std)
    return "\n".join(lines) + "\n"


def loads(text):
    """Parse checkpoint text; returns (ModelState, FeatureScaler or None)."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise ParseError(f"not a {MAGIC} document", line=1)

    header = {}
    tensors = {}
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", line=i + 1)
        key, _, value = line.partition("=")
        if key == "tensor":
            parts = value.split()
            if not 2 <= len(parts) <= 3:
                raise ParseError(f"bad tensor declaration {value!r}", line=i + 1)
            name = parts[0]
            try:
                shape = tuple(int(p) for p in parts[1:])
            except ValueError:
                raise ParseError(f"bad tensor shape in {value!r}", line=i + 1) from None
            n_rows = 1 if len(shape) == 1 else shape[0]
            n_cols = shape[0] if len(shape) == 1 else shape[1]
            block = np.empty((n_rows, n_cols), dtype=np.float64)
            for r in range(n_rows):
                i += 1
                if i >= len(lines):
                    raise ParseError(f"tensor {name!r} is truncated", line=i)
                try:
                    row = [float(tok) for tok in lines[i].split()]
                except ValueError:
                    raise ParseError(f"non-numeric value in tensor {name!r}", line=i + 1) from None
                if len(row) != n_cols:
                    raise ParseError(
                        f"tensor {name!r} row {r}: expected {n_cols} values, got {len(row)}",
                        line=i + 1,
                    )
                block[r] = row
            tensors[name] = block.reshape(shape)
        else:
            header[key] = value
        i += 1

    for key in ("format_version", "variant", "leaky_slope", "n_layers", "standardized"):
        if key not in header:
            raise SchemaError(f"checkpoint missing header field {key!r}")
    if int(header["format_version"]) != FORMAT_VERSION:
        raise SchemaError(
            f"unsupported checkpoint format_version {header['format_version']}"
        )
    n_layers = int(header["n_layers"])
    weights, biases = [], []
    for layer in range(1, n_layers + 1):
        for prefix, bucket in (("W", weights), ("b", biases)):
            name = f"{prefix}{layer}"
            if name not in tensors:
                raise SchemaError(f"checkpoint missing tensor {name!r}")
            bucket.append(tensors[name])
    for name in ("B", "A"):
        if name not in tensors:
            raise SchemaError(f"checkpoint missing tensor {name!r}")

    theta = embedding.EmbeddingParams(
        header["variant"], weights, biases, float(header["leaky_slope"])
    )
    state = ModelState(theta, tensors["B"], tensors["A"])
    scaler = None
    if header["standardized"] == "1":
        if "feat_mean" not in tensors or "feat_std" not in tensors:
            raise SchemaError("standardized checkpoint missing feat_mean/feat_std")
        scaler = FeatureScaler(tensors["feat_mean"], tensors["feat_std"])
    return state, scaler


def save(path, state, scaler=None):
    from .fsio import write_text_atomic

    write_text_atomic(path, dumps(state, scaler))


def load(path):
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise SchemaError(f"cannot read checkpoint {path}: {exc}") from exc
    return loads(text)
