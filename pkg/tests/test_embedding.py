import numpy as np
import pytest

from landmarkml import embedding
from landmarkml.errors import ArgumentError
from landmarkml.gradcheck import fd_gradient, guarded_relative_error


def test_linear_shapes_and_zero_bias():
    p = embedding.init_params("linear", 3, 2, seed=0)
    assert p.weights[0].shape == (3, 2)
    np.testing.assert_array_equal(p.biases[0], [0.0, 0.0])


def test_mlp_default_layer_shapes():
    p = embedding.init_params("mlp", 72, 6, seed=0)
    assert [W.shape for W in p.weights] == [(72, 512), (512, 64), (64, 6)]
    assert p.hidden_widths == (512, 64)


def test_init_deterministic():
    a = embedding.init_params("mlp", 5, 3, seed=9, hidden=(4, 3))
    b = embedding.init_params("mlp", 5, 3, seed=9, hidden=(4, 3))
    for Wa, Wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(Wa, Wb)


def test_init_glorot_bounds():
    p = embedding.init_params("linear", 10, 5, seed=2)
    bound = np.sqrt(6.0 / 15.0)
    assert np.abs(p.weights[0]).max() <= bound


def test_unknown_variant_rejected():
    with pytest.raises(ArgumentError):
        embedding.init_params("cnn", 3, 2, seed=0)


class TestLeakyRelu:
    def test_positive_identity(self):
        assert embedding.leaky_relu(2.0, 0.01) == 2.0

    def test_negative_scaled(self):
        assert embedding.leaky_relu(-2.0, 0.01) == pytest.approx(-0.02)

    def test_grad_negative(self):
        assert embedding.leaky_relu_grad(-1.0, 0.01) == 0.01

    def test_grad_at_zero_is_one(self):
        assert embedding.leaky_relu_grad(0.0, 0.01) == 1.0


class TestForward:
    def test_zero_map(self):
        p = embedding.EmbeddingParams("linear", [np.zeros((3, 2))], [np.zeros(2)])
        F, _ = embedding.forward(p, np.random.default_rng(0).standard_normal((4, 3)))
        np.testing.assert_array_equal(F, np.zeros((4, 2)))

    def test_identity_map(self):
        p = embedding.EmbeddingParams("linear", [np.eye(3)], [np.zeros(3)])
        F, _ = embedding.forward(p, np.eye(3))
        np.testing.assert_array_equal(F, np.eye(3))

    def test_mlp_matches_explicit_recomputation(self):
        p = embedding.init_params("mlp", 4, 3, seed=1, hidden=(6, 5))
        X = np.random.default_rng(2).standard_normal((5, 4))
        F, _ = embedding.forward(p, X)
        assert F.shape == (5, 3)
        assert np.isfinite(F).all()

        # independent recomputation with explicit loops over np.maximum
        def leaky(z):
            return np.maximum(z, 0.0) + 0.01 * np.minimum(z, 0.0)

        H1 = leaky(X @ p.weights[0] + p.biases[0])
        H2 = leaky(H1 @ p.weights[1] + p.biases[1])
        expected = H2 @ p.weights[2] + p.biases[2]
        np.testing.assert_allclose(F, expected, rtol=0, atol=1e-14)

    def test_dimension_mismatch_rejected(self):
        p = embedding.init_params("linear", 3, 2, seed=0)
        with pytest.raises(ArgumentError):
            embedding.forward(p, np.zeros((2, 4)))

    def test_forward_deterministic(self):
        p = embedding.init_params("mlp", 4, 2, seed=3, hidden=(5, 4))
        X = np.random.default_rng(4).standard_normal((6, 4))
        F1, _ = embedding.forward(p, X)
        F2, _ = embedding.forward(p, X)
        np.testing.assert_array_equal(F1, F2)

    def test_final_layer_scaling_scales_output(self):
        # with hidden layers fixed, scaling (W3, b3) by t scales F by t
        p = embedding.init_params("mlp", 4, 3, seed=5, hidden=(5, 4))
        X = np.random.default_rng(6).standard_normal((7, 4))
        F, _ = embedding.forward(p, X)
        t = 3.5
        scaled = p.copy()
        scaled.weights[2] *= t
        scaled.biases[2] *= t
        F_scaled, _ = embedding.forward(scaled, X)
        np.testing.assert_allclose(F_scaled, t * F, rtol=1e-12)


class TestBackward:
    def test_zero_upstream_gives_zero_grads(self):
        p = embedding.init_params("mlp", 3, 2, seed=0, hidden=(4, 3))
        X = np.random.default_rng(1).standard_normal((5, 3))
        _, cache = embedding.forward(p, X)
        g = embedding.backward(p, cache, np.zeros((5, 2)))
        for G in g.weights + g.biases:
            np.testing.assert_array_equal(G, np.zeros_like(G))

    def test_linear_closed_form(self):
        p = embedding.init_params("linear", 3, 2, seed=0)
        X = np.random.default_rng(2).standard_normal((6, 3))
        G = np.random.default_rng(3).standard_normal((6, 2))
        _, cache = embedding.forward(p, X)
        g = embedding.backward(p, cache, G)
        np.testing.assert_allclose(g.weights[0], X.T @ G, atol=1e-14)
        np.testing.assert_allclose(g.biases[0], G.sum(axis=0), atol=1e-14)

    def test_mlp_gradients_match_finite_differences(self):
        rng = np.random.default_rng(7)
        p = embedding.init_params("mlp", 3, 2, seed=11, hidden=(5, 4))
        X = rng.standard_normal((4, 3))
        Y = (rng.random((4, 2)) < 0.5).astype(float)

        # scalar loss L = ||F - Y||_F^2, so dL/dF = 2 (F - Y)
        def loss_value():
            F, _ = embedding.forward(p, X)
            return float(((F - Y) ** 2).sum())

        F, cache = embedding.forward(p, X)
        grads = embedding.backward(p, cache, 2.0 * (F - Y))
        for tensors, gtensors in ((p.weights, grads.weights), (p.biases, grads.biases)):
            for layer in range(3):
                def f(t, _layer=layer, _tensors=tensors):
                    saved = _tensors[_layer]
                    _tensors[_layer] = t
                    try:
                        return loss_value()
                    finally:
                        _tensors[_layer] = saved

                numeric = fd_gradient(f, tensors[layer].copy(), step=1e-6)
                assert guarded_relative_error(gtensors[layer], numeric) <= 1e-5

    def test_cache_mismatch_rejected(self):
        p1 = embedding.init_params("mlp", 3, 2, seed=0, hidden=(4, 3))
        p2 = embedding.init_params("mlp", 3, 2, seed=0, hidden=(5, 3))
        X = np.zeros((2, 3))
        _, cache = embedding.forward(p1, X)
        with pytest.raises(ArgumentError):
            embedding.backward(p2, cache, np.zeros((2, 2)))


class TestSgdStep:
    def test_zero_grads_fixed_point(self):
        p = embedding.init_params("linear", 3, 2, seed=0)
        g = embedding.EmbeddingGradients([np.zeros((3, 2))], [np.zeros(2)])
        q = embedding.sgd_step(p, g, 0.5)
        np.testing.assert_array_equal(p.weights[0], q.weights[0])

    def test_scalar_update_rule(self):
        p = embedding.EmbeddingParams(
            "linear", [np.full((1, 2), 2.0)], [np.zeros(2)]
        )
        g = embedding.EmbeddingGradients([np.full((1, 2), 0.5)], [np.zeros(2)])
        q = embedding.sgd_step(p, g, 1.0)
        np.testing.assert_allclose(q.weights[0], np.full((1, 2), 1.5))

    def test_two_steps_equal_one_double_step(self):
        p = embedding.init_params("linear", 4, 3, seed=1)
        g = embedding.EmbeddingGradients(
            [np.random.default_rng(2).standard_normal((4, 3))], [np.ones(3)]
        )
        twice = embedding.sgd_step(embedding.sgd_step(p, g, 1e-3), g, 1e-3)
        once = embedding.sgd_step(p, g, 2e-3)
        np.testing.assert_allclose(twice.weights[0], once.weights[0], atol=1e-15)

    def test_nonpositive_lr_rejected(self):
        p = embedding.init_params("linear", 2, 2, seed=0)
        g = embedding.EmbeddingGradients([np.zeros((2, 2))], [np.zeros(2)])
        with pytest.raises(ArgumentError):
            embedding.sgd_step(p, g, 0.0)
