"""Central finite-difference verification of every analytic gradient.

This backs both the test suite and the ``gradcheck`` CLI command: on a
batch of random small instances it compares grad_B, grad_A, grad_F and
the full multilayer backward pass against central differences of the
scalar objective, and reports the worst guarded relative error per
gradient.

The error measure is |analytic - numeric| / max(|analytic| + |numeric|,
0.01): relative for entries of ordinary size, absolute for entries near
zero where central differences carry only ~1e-8 of accuracy. A wrong
formula produces errors at the scale of the entries themselves, orders
of magnitude above the 1e-5 acceptance threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import embedding, objective
from .errors import ArgumentError

FD_STEP = 1e-6
TOLERANCE = 1e-5
_GUARD = 1e-2

CHECK_NAMES = ("grad_B", "grad_A", "grad_F", "backward")


@dataclass
class GradCheckResult:
    seed: int
    trials: int
    step: float
    tolerance: float
    max_rel_error: dict = field(default_factory=dict)  # check name -> worst error
    dims: list = field(default_factory=list)  # (n, d, c) per trial

    @property
    def passed(self):
        return {name: err <= self.tolerance for name, err in self.max_rel_error.items()}

    @property
    def all_passed(self):
        return all(self.passed.values())


def fd_gradient(f, x, step=FD_STEP):
    """Central finite differences of scalar f at array x, entry by entry."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = f(x)
        flat[i] = orig - step
        down = f(x)
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * step)
    return grad


def guarded_relative_error(analytic, numeric):
    a = np.asarray(analytic, dtype=np.float64)
    b = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.abs(a) + np.abs(b), _GUARD)
    return float((np.abs(a - b) / denom).max())


def _random_instance(rng, hidden):
    n = int(rng.integers(2, 9))
    d = int(rng.integers(2, 7))
    c = int(rng.integers(2, 6))
    X = rng.standard_normal((n, d))
    Y = (rng.random((n, c)) < 0.5).astype(np.float64)
    # keep every row of B well inside the smooth region of the l2,1 term
    B = rng.uniform(0.3, 1.0, size=(c, c)) * rng.choice((-1.0, 1.0), size=(c, c))
    A = rng.standard_normal((c, c))
    theta = embedding.init_params("mlp", d, c, seed=int(rng.integers(0, 2**31)),
                                  hidden=hidden)
    return n, d, c, X, Y, B, A, theta


def run_gradcheck(seed=0, trials=20, step=FD_STEP, tolerance=TOLERANCE,
                  hidden=(5, 4), corrupt=None):
    """Check all four gradients on ``trials`` random instances.

    ``corrupt`` (one of CHECK_NAMES) deliberately perturbs that analytic
    gradient before comparison; used to prove the check actually detects
    wrong gradients.
    """
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    if corrupt is not None and corrupt not in CHECK_NAMES:
        raise ArgumentError(f"corrupt must be one of {CHECK_NAMES}, got {corrupt!r}")
    rng = np.random.default_rng(seed)
    hp = objective.Hyperparams()
    result = GradCheckResult(seed=seed, trials=trials, step=step, tolerance=tolerance,
                             max_rel_error={name: 0.0 for name in CHECK_NAMES})

    def tamper(name, g):
        if corrupt == name:
            return g * 1.01 + 1e-3
        return g

    for _ in range(trials):
        n, d, c, X, Y, B, A, theta = _random_instance(rng, hidden)
        result.dims.append((n, d, c))
        F, cache = embedding.forward(theta, X)

        analytic = tamper("grad_B", objective.grad_B(F, Y, B, A, hp))
        numeric = fd_gradient(lambda b: objective.loss(F, Y, b, A, hp), B.copy(), step)
        result.max_rel_error["grad_B"] = max(
            result.max_rel_error["grad_B"], guarded_relative_error(analytic, numeric))

        analytic = tamper("grad_A", objective.grad_A(Y, B, A))
        numeric = fd_gradient(lambda a: objective.loss(F, Y, B, a, hp), A.copy(), step)
        result.max_rel_error["grad_A"] = max(
            result.max_rel_error["grad_A"], guarded_relative_error(analytic, numeric))

        analytic = tamper("grad_F", objective.grad_F(F, Y, B))
        numeric = fd_gradient(lambda f: objective.loss(f, Y, B, A, hp), F.copy(), step)
        result.max_rel_error["grad_F"] = max(
            result.max_rel_error["grad_F"], guarded_relative_error(analytic, numeric))

        # full backward pass: dL/dtheta for the complete objective
        grads = embedding.backward(theta, cache, objective.grad_F(F, Y, B))
        worst = result.max_rel_error["backward"]
        for layer in range(len(theta.weights)):
            for kind, tensors, grad in (
                ("W", theta.weights, grads.weights[layer]),
                ("b", theta.biases, grads.biases[layer]),
            ):
                def loss_of(t, _layer=layer, _tensors=tensors):
                    saved = _tensors[_layer]
                    _tensors[_layer] = t
                    try:
                        out, _ = embedding.forward(theta, X)
                        return objective.loss(out, Y, B, A, hp)
                    finally:
                        _tensors[_layer] = saved
                numeric = fd_gradient(loss_of, tensors[layer].copy(), step)
                worst = max(worst, guarded_relative_error(tamper("backward", grad), numeric))
        result.max_rel_error["backward"] = worst

    return result


def format_report(result):
    lines = [
        f"seed={result.seed} trials={result.trials} step={result.step!r} "
        f"tolerance={result.tolerance!r}"
    ]
    dims = ";".join(f"{n}x{d}x{c}" for n, d, c in result.dims)
    lines.append(f"instance dims (NxDxC): {dims}")
    for name in CHECK_NAMES:
        err = result.max_rel_error[name]
        status = "PASS" if err <= result.tolerance else "FAIL"
        lines.append(f"{name}: max_rel_error={err:.3e} {status}")
    lines.append("overall: " + ("PASS" if result.all_passed else "FAIL"))
    return "\n".join(lines) + "\n"
