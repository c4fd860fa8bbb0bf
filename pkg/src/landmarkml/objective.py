"""The joint selection/prediction/recovery objective and its gradients.

With F = f(X; theta) the embedding output, Y the binary label matrix,
B the (C x C) landmark selection matrix and A the (C x C) label
correlation matrix, the minimized loss is

    ||(F - Y) B||_F^2  +  ||Y - Y B A||_F^2
        + lambda1 ||B - I||_F^2  +  lambda2 ||B||_{2,1}

summed over all instances (no 1/N averaging); learning rates elsewhere
are documented relative to this convention. The row-wise l2,1 term keeps
few rows of B alive, the ||B - I|| term anchors selected labels, and the
recovery term forces the selected columns of Y to reconstruct all of Y.

Analytic gradients are exact for the three smooth terms; the l2,1 term
uses the standard reweighting 2 * lambda2 * D * B with
D_ii = 1 / (2 * max(||B_i||, epsilon_row)), which equals the true
gradient wherever row norms exceed the safeguard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericError


@dataclass
class Hyperparams:
    lambda1: float = 0.1
    lambda2: float = 0.1
    epsilon_row: float = 1e-8

    def __post_init__(self):
        if self.lambda1 < 0.0 or self.lambda2 < 0.0:
            raise ArgumentError("lambda1 and lambda2 must be >= 0")
        if self.epsilon_row <= 0.0:
            raise ArgumentError("epsilon_row must be > 0")


def _as_finite(name, M):
    M = np.asarray(M, dtype=np.float64)
    if not np.isfinite(M).all():
        raise NumericError(f"{name} contains non-finite values")
    return M


def _check_shapes(F, Y, B, A=None):
    if F.shape != Y.shape:
        raise ArgumentError(f"F {F.shape} and Y {Y.shape} must have equal shapes")
    c = Y.shape[1]
    if B.shape != (c, c):
        raise ArgumentError(f"B must be {c}x{c}, got {B.shape}")
    if A is not None and A.shape != (c, c):
        raise ArgumentError(f"A must be {c}x{c}, got {A.shape}")


def norm_21(M):
    """Sum over rows of the row's Euclidean norm."""
    M = _as_finite("M", M)
    return float(np.sqrt((M * M).sum(axis=1)).sum())


def loss(F, Y, B, A, hp):
    """Value of the full objective at (F, Y, B, A)."""
    F = _as_finite("F", F)
    Y = _as_finite("Y", Y)
    B = _as_finite("B", B)
    A = _as_finite("A", A)
    _check_shapes(F, Y, B, A)
    c = B.shape[0]
    pred = (F - Y) @ B
    recov = Y - Y @ B @ A
    anchor = B - np.eye(c)
    return float(
        (pred * pred).sum()
        + (recov * recov).sum()
        + hp.lambda1 * (anchor * anchor).sum()
        + hp.lambda2 * norm_21(B)
    )


def grad_B(F, Y, B, A, hp):
    """dL/dB with the safeguarded l2,1 reweighting."""
    F = _as_finite("F", F)
    Y = _as_finite("Y", Y)
    B = _as_finite("B", B)
    A = _as_finite("A", A)
    _check_shapes(F, Y, B, A)
    c = B.shape[0]
    E = F - Y
    recov = Y - Y @ B @ A
    row_norms = np.sqrt((B * B).sum(axis=1))
    d = 1.0 / (2.0 * np.maximum(row_norms, hp.epsilon_row))
    return (
        2.0 * E.T @ (E @ B)
        - 2.0 * Y.T @ recov @ A.T
        + 2.0 * hp.lambda1 * (B - np.eye(c))
        + 2.0 * hp.lambda2 * d[:, None] * B
    )


def grad_A(Y, B, A):
    """dL/dA = -2 B^T Y^T (Y - Y B A)."""
    Y = _as_finite("Y", Y)
    B = _as_finite("B", B)
    A = _as_finite("A", A)
    _check_shapes(Y, Y, B, A)
    recov = Y - Y @ B @ A
    return -2.0 * B.T @ (Y.T @ recov)


def grad_F(F, Y, B):
    """dL/dF = 2 (F - Y) B B^T, the input gradient fed to backward()."""
    F = np.asarray(F, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    _check_shapes(F, Y, B)
    return 2.0 * (F - Y) @ (B @ B.T)
