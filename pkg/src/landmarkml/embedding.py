"""The feature-embedding and classification map f(X; theta).

Two variants share one layered representation: ``linear`` is a single
affine layer X W + b, ``mlp`` stacks two leaky-ReLU hidden layers
(default widths 512 and 64) under a final affine layer. The output layer
is always linear, with no activation, so the map can regress onto the
0/1 label scale directly.

``forward`` caches pre-activations; ``backward`` turns dL/dF into exact
chain-rule parameter gradients. Everything is float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

VARIANTS = ("linear", "mlp")
DEFAULT_HIDDEN = (512, 64)
DEFAULT_LEAKY_SLOPE = 0.01


@dataclass
class EmbeddingParams:
    """Per-layer weight matrices and bias vectors.

    ``linear`` has one layer; ``mlp`` has three. Hidden layers (all but
    the last) are followed by a leaky ReLU with the given negative slope.
    """

    variant: str
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    leaky_slope: float = DEFAULT_LEAKY_SLOPE

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ArgumentError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        expected_layers = 1 if self.variant == "linear" else 3
        if len(self.weights) != expected_layers or len(self.biases) != expected_layers:
            raise ArgumentError(
                f"{self.variant} variant requires {expected_layers} layers, "
                f"got {len(self.weights)} weight / {len(self.biases)} bias tensors"
            )
        if not 0.0 < self.leaky_slope < 1.0:
            raise ArgumentError(f"leaky_slope must be in (0, 1), got {self.leaky_slope}")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.ndim != 1 or W.shape[1] != b.shape[0]:
                raise ArgumentError(f"layer {i}: weight {W.shape} and bias {b.shape} disagree")
            if i > 0 and self.weights[i - 1].shape[1] != W.shape[0]:
                raise ArgumentError(
                    f"layer {i}: input width {W.shape[0]} does not match "
                    f"previous output width {self.weights[i - 1].shape[1]}"
                )
        if any(not np.isfinite(W).all() for W in self.weights) or any(
            not np.isfinite(b).all() for b in self.biases
        ):
            raise ArgumentError("parameters must be finite")

    @property
    def d_in(self):
        return self.weights[0].shape[0]

    @property
    def n_outputs(self):
        return self.weights[-1].shape[1]

    @property
    def hidden_widths(self):
        return tuple(W.shape[1] for W in self.weights[:-1])

    def copy(self):
        return EmbeddingParams(
            self.variant,
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
            self.leaky_slope,
        )


@dataclass
class EmbeddingGradients:
    """dL/d(parameter), shape-congruent with its EmbeddingParams."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class ForwardCache:
    """Intermediates kept by forward() for the matching backward()."""

    X: np.ndarray
    pre_activations: list[np.ndarray]  # Z_i before the leaky ReLU, hidden layers only
    hidden: list[np.ndarray]  # H_i after the leaky ReLU
    layer_shapes: tuple


def init_params(variant, d_in, n_outputs, seed, hidden=DEFAULT_HIDDEN,
                leaky_slope=DEFAULT_LEAKY_SLOPE):
    """Glorot-uniform weights (+- sqrt(6/(fan_in+fan_out))), zero biases."""
    if d_in < 1:
        raise ArgumentError(f"d_in must be >= 1, got {d_in}")
    if n_outputs < 2:
        raise ArgumentError(f"n_outputs must be >= 2, got {n_outputs}")
    if variant == "linear":
        dims = [d_in, n_outputs]
    elif variant == "mlp":
        if len(hidden) != 2 or any(h < 1 for h in hidden):
            raise ArgumentError(f"mlp variant needs two positive hidden widths, got {hidden}")
        dims = [d_in, hidden[0], hidden[1], n_outputs]
    else:
        raise ArgumentError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return EmbeddingParams(variant, weights, biases, leaky_slope)


def leaky_relu(x, slope=DEFAULT_LEAKY_SLOPE):
    """x for x >= 0, slope*x below."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0.0, x, slope * x)


def leaky_relu_grad(x, slope=DEFAULT_LEAKY_SLOPE):
    """Derivative of leaky_relu; the value at exactly 0 is defined as 1."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0.0, 1.0, slope)


def forward(params, X):
    """Evaluate F = f(X; theta); returns (F, cache for backward)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.d_in:
        raise ArgumentError(
            f"X has shape {X.shape}, embedding expects (*, {params.d_in})"
        )
    pre, hidden = [], []
    H = X
    for W, b in zip(params.weights[:-1], params.biases[:-1]):
        Z = H @ W + b
        H = leaky_relu(Z, params.leaky_slope)
        pre.append(Z)
        hidden.append(H)
    F = H @ params.weights[-1] + params.biases[-1]
    cache = ForwardCache(X, pre, hidden, tuple(W.shape for W in params.weights))
    return F, cache


def backward(params, cache, G):
    """Chain-rule parameter gradients given G = dL/dF from the objective."""
    if cache.layer_shapes != tuple(W.shape for W in params.weights):
        raise ArgumentError("cache does not match these parameters")
    G = np.asarray(G, dtype=np.float64)
    n = cache.X.shape[0]
    if G.shape != (n, params.n_outputs):
        raise ArgumentError(
            f"G has shape {G.shape}, expected ({n}, {params.n_outputs})"
        )
    n_layers = len(params.weights)
    grad_w = [None] * n_layers
    grad_b = [None] * n_layers

    delta = G
    for i in range(n_layers - 1, -1, -1):
        inputs = cache.hidden[i - 1] if i > 0 else cache.X
        grad_w[i] = inputs.T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * leaky_relu_grad(
                cache.pre_activations[i - 1], params.leaky_slope
            )
    return EmbeddingGradients(grad_w, grad_b)


def sgd_step(params, grads, learning_rate):
    """params - learning_rate * grads, as a new parameter record."""
    if learning_rate <= 0.0:
        raise ArgumentError(f"learning_rate must be positive, got {learning_rate}")
    if len(grads.weights) != len(params.weights):
        raise ArgumentError("gradient record does not match these parameters")
    weights = [W - learning_rate * g for W, g in zip(params.weights, grads.weights)]
    biases = [b - learning_rate * g for b, g in zip(params.biases, grads.biases)]
    return EmbeddingParams(params.variant, weights, biases, params.leaky_slope)
