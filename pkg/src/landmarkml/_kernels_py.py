"""Pure-numpy fallback for the hot training kernels.

One call runs a full epoch of minibatch SGD on the embedding parameters:
shuffled batches of ``batch_size``, each doing forward -> dL/dF ->
backward -> in-place parameter update. dL/dF for the prediction term is
2 (F - Y) B B^T; the caller passes BBT = B @ B.T, which is constant for
the whole epoch because B only moves between epochs.

The compiled extension (landmarkml._kernels) implements the identical
arithmetic with fused BLAS calls; this module is the reference its
outputs are tested against, and the import-time fallback when the
extension is unavailable.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _leaky(Z, slope):
    return np.where(Z >= 0.0, Z, slope * Z)


def _leaky_grad(Z, slope):
    return np.where(Z >= 0.0, 1.0, slope)


def linear_epoch(X, Y, BBT, W, b, lr, order, batch_size):
    """One shuffled minibatch epoch for the single-layer variant; updates
    W and b in place."""
    n = X.shape[0]
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        Xb = X[idx]
        Yb = Y[idx]
        F = Xb @ W + b
        G = 2.0 * (F - Yb) @ BBT
        gW = Xb.T @ G
        gb = G.sum(axis=0)
        W -= lr * gW
        b -= lr * gb


def mlp_epoch(X, Y, BBT, W1, b1, W2, b2, W3, b3, slope, lr, order, batch_size):
    """One shuffled minibatch epoch for the two-hidden-layer variant;
    updates all six parameter tensors in place."""
    n = X.shape[0]
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        Xb = X[idx]
        Yb = Y[idx]

        Z1 = Xb @ W1 + b1
        H1 = _leaky(Z1, slope)
        Z2 = H1 @ W2 + b2
        H2 = _leaky(Z2, slope)
        F = H2 @ W3 + b3

        G = 2.0 * (F - Yb) @ BBT
        gW3 = H2.T @ G
        gb3 = G.sum(axis=0)
        D2 = (G @ W3.T) * _leaky_grad(Z2, slope)
        gW2 = H1.T @ D2
        gb2 = D2.sum(axis=0)
        D1 = (D2 @ W2.T) * _leaky_grad(Z1, slope)
        gW1 = Xb.T @ D1
        gb1 = D1.sum(axis=0)

        W1 -= lr * gW1
        b1 -= lr * gb1
        W2 -= lr * gW2
        b2 -= lr * gb2
        W3 -= lr * gW3
        b3 -= lr * gb3
