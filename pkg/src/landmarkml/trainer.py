"""Alternating-direction training loop and prediction.

Each outer iteration cycles three blocks while holding the others fixed:

1. theta: one epoch of minibatch SGD through the embedding, driven by
   dL/dF = 2 (F - Y) B B^T,
2. B: one full-batch gradient step, then (by default) a hard projection
   that zeroes every off-diagonal entry,
3. A: one full-batch gradient step on the recovery term.

B starts at the identity (every label initially selected); A starts at
small Gaussian noise. The loop records the full loss after every outer
iteration and stops when the relative loss change drops below rel_tol or
the iteration cap is reached. A fixed seed makes the whole run, and
therefore the resulting checkpoint, reproducible bit-for-bit.

Prediction scores for new inputs are f(X; theta) B A.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import embedding, metrics, objective
from .backend import kernels as _active_kernels
from .data import split_folds, standardize_features
from .errors import ArgumentError, DivergenceError

DEFAULT_SEED = 0


@dataclass
class TrainConfig:
    hp: objective.Hyperparams = field(default_factory=objective.Hyperparams)
    lr_theta: float = 1e-3
    lr_B: float = 1e-3
    lr_A: float = 1e-3
    batch_size: int = 64
    max_outer_iters: int = 500
    rel_tol: float = 1e-5
    seed: int = DEFAULT_SEED
    variant: str = "mlp"
    hard_diagonal: bool = True
    hidden: tuple = embedding.DEFAULT_HIDDEN
    leaky_slope: float = embedding.DEFAULT_LEAKY_SLOPE
    standardize: bool = True

    def __post_init__(self):
        if min(self.lr_theta, self.lr_B, self.lr_A) <= 0.0:
            raise ArgumentError("learning rates must be positive")
        if self.batch_size < 1:
            raise ArgumentError("batch_size must be >= 1")
        if self.max_outer_iters < 1:
            raise ArgumentError("max_outer_iters must be >= 1")
        if self.variant not in embedding.VARIANTS:
            raise ArgumentError(
                f"unknown variant {self.variant!r}; expected one of {embedding.VARIANTS}"
            )


@dataclass
class ModelState:
    theta: embedding.EmbeddingParams
    B: np.ndarray
    A: np.ndarray


@dataclass
class TrainReport:
    loss_per_outer_iter: list
    converged: bool
    iters_run: int
    wall_time: float
    seconds_per_outer_iter: list

    def to_log_csv(self):
        """Training log: one ``iter,loss,delta,seconds`` row per outer
        iteration."""
        lines = ["iter,loss,delta,seconds"]
        prev = None
        for i, (L, sec) in enumerate(
            zip(self.loss_per_outer_iter, self.seconds_per_outer_iter)
        ):
            delta = "" if prev is None else repr(L - prev)
            lines.append(f"{i},{L!r},{delta},{sec!r}")
            prev = L
        return "\n".join(lines) + "\n"


def enforce_diagonal(B):
    """Zero the off-diagonal entries of B, preserving the diagonal exactly."""
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ArgumentError(f"B must be square, got shape {B.shape}")
    return np.diag(np.diag(B).copy())


def train(ds, cfg, kernels=None):
    """Run the alternating loop on a dataset; returns (ModelState, TrainReport).

    Features are used exactly as given; callers wanting standardization
    apply it first (see fit(), which also keeps the scaler for held-out
    data).
    """
    kern = kernels if kernels is not None else _active_kernels
    X = np.ascontiguousarray(ds.features, dtype=np.float64)
    Y = np.ascontiguousarray(ds.labels, dtype=np.float64)
    n, d = X.shape
    c = Y.shape[1]

    theta = embedding.init_params(
        cfg.variant, d, c, cfg.seed, hidden=cfg.hidden, leaky_slope=cfg.leaky_slope
    )
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    B = np.eye(c)
    A = 0.01 * rng.standard_normal((c, c))

    weights = [np.ascontiguousarray(W) for W in theta.weights]
    biases = [np.ascontiguousarray(b) for b in theta.biases]

    losses = []
    seconds = []
    converged = False
    prev = None
    t_start = time.perf_counter()
    for it in range(cfg.max_outer_iters):
        t_iter = time.perf_counter()
        order = rng.permutation(n)
        BBT = B @ B.T
        if cfg.variant == "linear":
            kern.linear_epoch(X, Y, BBT, weights[0], biases[0],
                              cfg.lr_theta, order, cfg.batch_size)
        else:
            kern.mlp_epoch(X, Y, BBT, weights[0], biases[0], weights[1], biases[1],
                           weights[2], biases[2], cfg.leaky_slope, cfg.lr_theta,
                           order, cfg.batch_size)

        if any(not np.isfinite(W).all() for W in weights) or any(
            not np.isfinite(b).all() for b in biases
        ):
            raise DivergenceError(
                f"non-finite embedding parameters at outer iteration {it} "
                f"(lr_theta={cfg.lr_theta})"
            )
        theta = embedding.EmbeddingParams(cfg.variant, weights, biases, cfg.leaky_slope)
        F, _ = embedding.forward(theta, X)
        if not np.isfinite(F).all():
            raise DivergenceError(
                f"non-finite embedding output at outer iteration {it} "
                f"(lr_theta={cfg.lr_theta})"
            )
        B = B - cfg.lr_B * objective.grad_B(F, Y, B, A, cfg.hp)
        if cfg.hard_diagonal:
            B = enforce_diagonal(B)
        if not np.isfinite(B).all():
            raise DivergenceError(
                f"non-finite selection matrix at outer iteration {it} (lr_B={cfg.lr_B})"
            )
        A = A - cfg.lr_A * objective.grad_A(Y, B, A)
        if not np.isfinite(A).all():
            raise DivergenceError(
                f"non-finite correlation matrix at outer iteration {it} (lr_A={cfg.lr_A})"
            )

        L = objective.loss(F, Y, B, A, cfg.hp)
        if not np.isfinite(L):
            raise DivergenceError(
                f"non-finite loss at outer iteration {it} "
                f"(lr_theta={cfg.lr_theta}, lr_B={cfg.lr_B}, lr_A={cfg.lr_A})"
            )
        losses.append(L)
        seconds.append(time.perf_counter() - t_iter)
        if prev is not None and abs(L - prev) / max(prev, 1e-12) < cfg.rel_tol:
            converged = True
            break
        prev = L

    report = TrainReport(
        loss_per_outer_iter=losses,
        converged=converged,
        iters_run=len(losses),
        wall_time=time.perf_counter() - t_start,
        seconds_per_outer_iter=seconds,
    )
    return ModelState(theta, B, A), report


def fit(ds, cfg, kernels=None):
    """Standardize (when configured), then train.

    Returns (ModelState, TrainReport, FeatureScaler or None); the scaler
    must be applied to any held-out features before predict_scores.
    """
    scaler = None
    if cfg.standardize:
        ds, scaler = standardize_features(ds)
    state, report = train(ds, cfg, kernels=kernels)
    return state, report, scaler


def predict_scores(state, X):
    """Recovery scores f(X; theta) B A for already-transformed features."""
    X = np.asarray(X, dtype=np.float64)
    F, _ = embedding.forward(state.theta, X)
    return F @ state.B @ state.A


@dataclass
class CVResult:
    k: int
    per_fold: list  # MetricReport per fold
    mean: dict
    std: dict  # sample standard deviation (ddof=1)

    def to_csv(self):
        """One row per fold plus a combined mean+-std summary row."""
        names = metrics.METRIC_NAMES
        lines = ["fold," + ",".join(names)]
        for i, rep in enumerate(self.per_fold):
            lines.append(f"{i}," + ",".join(repr(getattr(rep, m)) for m in names))
        summary = ",".join(
            f"{self.mean[m]:.6f}+-{self.std[m]:.6f}" for m in names
        )
        lines.append("mean+-std," + summary)
        return "\n".join(lines) + "\n"


def cross_validate(ds, cfg, k, threshold=0.5, kernels=None):
    """k-fold cross-validation with per-fold standardization.

    Scalers are fit on the k-1 training folds only; the held-out fold is
    transformed with the training statistics before scoring.
    """
    if k < 2:
        raise ArgumentError(f"need at least 2 folds, got {k}")
    assignment = split_folds(ds.n_instances, k, cfg.seed)
    per_fold = []
    for fold in range(k):
        train_idx = assignment.train_indices(fold)
        test_idx = assignment.test_indices(fold)
        if len(test_idx) == 0 or len(train_idx) == 0:
            raise ArgumentError(f"fold {fold} has no instances")
        state, _, scaler = fit(ds.subset(train_idx), cfg, kernels=kernels)
        X_test = ds.features[test_idx]
        if scaler is not None:
            X_test = scaler.transform(X_test)
        scores = predict_scores(state, X_test)
        per_fold.append(metrics.evaluate(scores, ds.labels[test_idx], threshold))

    mean = {}
    std = {}
    for m in metrics.METRIC_NAMES:
        vals = np.array([getattr(rep, m) for rep in per_fold])
        mean[m] = float(vals.mean())
        std[m] = float(vals.std(ddof=1))
    return CVResult(k=k, per_fold=per_fold, mean=mean, std=std)


def config_with(cfg, **overrides):
    """dataclasses.replace passthrough, kept here for CLI convenience."""
    return replace(cfg, **overrides)
