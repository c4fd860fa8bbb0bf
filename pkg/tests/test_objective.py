import numpy as np
import pytest

from landmarkml import embedding
from landmarkml.errors import ArgumentError, NumericError
from landmarkml.gradcheck import (
    fd_gradient,
    guarded_relative_error,
    run_gradcheck,
)
from landmarkml.objective import Hyperparams, grad_A, grad_B, grad_F, loss, norm_21


def naive_norm_21(M):
    total = 0.0
    for i in range(M.shape[0]):
        row = 0.0
        for j in range(M.shape[1]):
            row += M[i, j] ** 2
        total += row ** 0.5
    return total


def naive_loss(F, Y, B, A, hp):
    """Term-by-term reimplementation with no shared code."""
    c = B.shape[0]
    t1 = np.linalg.norm((F - Y) @ B, "fro") ** 2
    t2 = np.linalg.norm(Y - Y @ B @ A, "fro") ** 2
    t3 = hp.lambda1 * np.linalg.norm(B - np.eye(c), "fro") ** 2
    t4 = hp.lambda2 * naive_norm_21(B)
    return t1 + t2 + t3 + t4


def random_instance(seed, n=4, c=3):
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((n, c))
    Y = (rng.random((n, c)) < 0.5).astype(float)
    B = rng.uniform(0.3, 1.2, (c, c)) * rng.choice([-1.0, 1.0], (c, c))
    A = rng.standard_normal((c, c))
    return F, Y, B, A


class TestNorm21:
    def test_identity(self):
        assert norm_21(np.eye(2)) == 2.0

    def test_345_row(self):
        assert norm_21(np.array([[3.0, 4.0], [0.0, 0.0]])) == 5.0

    def test_matches_double_loop(self):
        M = np.random.default_rng(0).standard_normal((5, 5))
        assert norm_21(M) == pytest.approx(naive_norm_21(M), abs=1e-12)


class TestLoss:
    def test_only_sparsity_term_survives(self):
        # F=Y, B=I, A=I: the three residual terms vanish exactly
        Y = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        hp = Hyperparams(0.1, 0.1)
        value = loss(Y, Y, np.eye(2), np.eye(2), hp)
        assert value == pytest.approx(0.1 * 2, abs=1e-15)

    def test_zero_selection_leaves_recovery_term(self):
        rng = np.random.default_rng(1)
        Y = (rng.random((5, 3)) < 0.5).astype(float)
        A = rng.standard_normal((3, 3))
        hp = Hyperparams(0.0, 0.0)
        value = loss(Y, Y, np.zeros((3, 3)), A, hp)
        assert value == pytest.approx((Y ** 2).sum(), abs=1e-12)

    def test_matches_naive_reimplementation(self):
        F, Y, B, A = random_instance(2)
        hp = Hyperparams(0.1, 0.1)
        assert loss(F, Y, B, A, hp) == pytest.approx(naive_loss(F, Y, B, A, hp), rel=1e-14)

    def test_nonnegative(self):
        for seed in range(10):
            F, Y, B, A = random_instance(seed)
            assert loss(F, Y, B, A, Hyperparams()) >= 0.0

    def test_nonfinite_input_rejected(self):
        F, Y, B, A = random_instance(3)
        F[0, 0] = np.nan
        with pytest.raises(NumericError):
            loss(F, Y, B, A, Hyperparams())

    def test_shape_mismatch_rejected(self):
        F, Y, B, A = random_instance(4)
        with pytest.raises(ArgumentError):
            loss(F, Y, B[:2, :2], A, Hyperparams())


class TestGradB:
    def test_identity_point_equals_lambda2_halved_rows(self):
        # F=Y, B=I, A=I: only the reweighted l2,1 term remains, D = I/2
        Y = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        hp = Hyperparams(0.7, 0.3)
        g = grad_B(Y, Y, np.eye(3), np.eye(3), hp)
        np.testing.assert_allclose(g, 0.3 * np.eye(3), atol=1e-15)

    def test_recovery_term_alone_matches_fd(self):
        rng = np.random.default_rng(5)
        n, c = 5, 3
        Y = (rng.random((n, c)) < 0.5).astype(float)
        B = rng.uniform(0.3, 1.0, (c, c))
        A = rng.standard_normal((c, c))
        hp = Hyperparams(0.0, 0.0, 1e-8)
        F = Y.copy()
        analytic = grad_B(F, Y, B, A, hp)
        np.testing.assert_allclose(analytic, -2.0 * Y.T @ (Y - Y @ B @ A) @ A.T, atol=1e-12)
        numeric = fd_gradient(lambda b: loss(F, Y, b, A, hp), B.copy(), step=1e-6)
        assert guarded_relative_error(analytic, numeric) <= 1e-5

    def test_full_loss_matches_fd(self):
        F, Y, B, A = random_instance(6)
        hp = Hyperparams(0.1, 0.1)
        analytic = grad_B(F, Y, B, A, hp)
        numeric = fd_gradient(lambda b: loss(F, Y, b, A, hp), B.copy(), step=1e-6)
        assert guarded_relative_error(analytic, numeric) <= 1e-5

    def test_reweighted_term_is_bounded(self):
        # every entry of the l2,1 surrogate is at most lambda2 in magnitude
        rng = np.random.default_rng(7)
        hp = Hyperparams(0.0, 0.5, 1e-8)
        for _ in range(20):
            c = int(rng.integers(2, 6))
            B = rng.standard_normal((c, c)) * rng.choice([1e-12, 1e-3, 1.0])
            Y = np.zeros((3, c))
            F = np.zeros((3, c))
            A = np.zeros((c, c))
            g = grad_B(F, Y, B, A, hp) - 2.0 * hp.lambda1 * (B - np.eye(c))
            assert np.abs(g).max() <= hp.lambda2 + 1e-12


class TestGradA:
    def test_zero_residual(self):
        Y = np.array([[1.0, 0.0], [1.0, 1.0]])
        np.testing.assert_array_equal(grad_A(Y, np.eye(2), np.eye(2)), np.zeros((2, 2)))

    def test_zero_labels(self):
        B = np.random.default_rng(8).standard_normal((3, 3))
        A = np.random.default_rng(9).standard_normal((3, 3))
        np.testing.assert_array_equal(grad_A(np.zeros((4, 3)), B, A), np.zeros((3, 3)))

    def test_matches_fd_of_recovery_term(self):
        _, Y, B, A = random_instance(10)
        hp = Hyperparams(0.0, 0.0)
        F = Y.copy()  # kill the prediction term; loss reduces to the recovery term
        analytic = grad_A(Y, B, A)
        numeric = fd_gradient(lambda a: loss(F, Y, B, a, hp), A.copy(), step=1e-6)
        assert guarded_relative_error(analytic, numeric) <= 1e-5

    def test_linear_in_residual(self):
        _, Y, B, A = random_instance(11)
        base = grad_A(Y, B, A)
        # scaling the residual by t: use A' with Y - Y B A' = t (Y - Y B A)
        # directly through the formula -2 B^T Y^T R
        R = Y - Y @ B @ A
        for t in (0.5, 2.0, -3.0):
            np.testing.assert_allclose(-2.0 * B.T @ Y.T @ (t * R), t * base, atol=1e-10)


class TestGradF:
    def test_zero_residual(self):
        F, Y, B, _ = random_instance(12)
        np.testing.assert_array_equal(grad_F(Y, Y, B), np.zeros_like(Y))

    def test_identity_selection(self):
        F, Y, _, _ = random_instance(13)
        np.testing.assert_allclose(grad_F(F, Y, np.eye(3)), 2.0 * (F - Y), atol=1e-14)

    def test_matches_fd_of_prediction_term(self):
        F, Y, B, A = random_instance(14)
        hp = Hyperparams(0.0, 0.0)

        def pred_term(f):
            return float((((f - Y) @ B) ** 2).sum())

        analytic = grad_F(F, Y, B)
        numeric = fd_gradient(pred_term, F.copy(), step=1e-6)
        assert guarded_relative_error(analytic, numeric) <= 1e-5


class TestGradcheckHarness:
    def test_default_seed_passes_all(self):
        result = run_gradcheck(seed=0, trials=5)
        assert result.all_passed, result.max_rel_error

    def test_corruption_is_detected(self):
        for name in ("grad_B", "grad_A", "grad_F", "backward"):
            result = run_gradcheck(seed=0, trials=2, corrupt=name)
            assert not result.passed[name]
            others = [v for k, v in result.passed.items() if k != name]
            assert all(others)

    def test_dims_recorded(self):
        result = run_gradcheck(seed=1, trials=3)
        assert len(result.dims) == 3
        for n, d, c in result.dims:
            assert 2 <= n <= 8 and 2 <= d <= 6 and 2 <= c <= 5
