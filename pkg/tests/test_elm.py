"""Hidden layer, batch fit, prediction, and model container."""

import numpy as np
import pytest

from wristflex.elm import (
    ACTIVATIONS,
    ElmModel,
    HiddenParams,
    OutputWeights,
    batch_fit,
    hidden_matrix,
    init_hidden_params,
    load_model,
    predict,
    predict_batch,
    save_model,
)
from wristflex.errors import ModelFormatError, UnsupportedVersionError


def _model(n=6, m=4, d=3, seed=0, activation="sigmoid"):
    params = init_hidden_params(n, m, activation, seed)
    rng = np.random.default_rng(seed + 1)
    beta = rng.normal(size=(n, d))
    return ElmModel(hidden=params, output=OutputWeights(beta=beta), output_dim=d)


class TestInitHiddenParams:
    def test_shapes(self):
        p = init_hidden_params(1, 4, "sigmoid", 0)
        assert p.weights.shape == (1, 4)
        assert p.biases.shape == (1,)

    def test_same_seed_bitwise_identical(self):
        a = init_hidden_params(8, 3, "sigmoid", 42)
        b = init_hidden_params(8, 3, "sigmoid", 42)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.biases, b.biases)

    def test_different_seed_differs(self):
        a = init_hidden_params(8, 3, "sigmoid", 1)
        b = init_hidden_params(8, 3, "sigmoid", 2)
        assert not np.array_equal(a.weights, b.weights)

    def test_uniform_law(self):
        # 10^5 weight draws: sample mean of U[-1, 1] has sem ~ 0.0018,
        # so +/-0.02 is an 11-sigma corridor
        p = init_hidden_params(250, 400, "sigmoid", 3)
        assert p.weights.size == 100_000
        assert abs(p.weights.mean()) < 0.02
        assert np.all(p.weights >= -1) and np.all(p.weights <= 1)
        assert np.all(p.biases >= -1) and np.all(p.biases <= 1)

    def test_bad_counts_rejected(self):
        with pytest.raises(ValueError):
            init_hidden_params(0, 4)
        with pytest.raises(ValueError):
            init_hidden_params(4, 0)

    def test_unknown_activation_rejected(self):
        with pytest.raises(ValueError, match="activation"):
            init_hidden_params(2, 2, "relu", 0)


class TestHiddenMatrix:
    def test_zero_params_sigmoid_gives_half(self):
        p = HiddenParams(
            weights=np.zeros((3, 4)),
            biases=np.zeros(3),
            activation="sigmoid",
            n_hidden=3,
            n_inputs=4,
        )
        h = hidden_matrix(p, np.random.default_rng(0).normal(size=(5, 4)))
        assert np.all(h == 0.5)

    def test_single_sample_row_shape(self):
        p = init_hidden_params(7, 2, "tanh", 0)
        h = hidden_matrix(p, np.ones((1, 2)))
        assert h.shape == (1, 7)

    @pytest.mark.parametrize("activation", ["sigmoid", "tanh"])
    def test_matches_scalar_loop_oracle(self, activation):
        rng = np.random.default_rng(11)
        p = init_hidden_params(3, 4, activation, 5)
        x = rng.normal(size=(5, 4))
        h = hidden_matrix(p, x)
        act = ACTIVATIONS[activation]
        for i in range(5):
            for j in range(3):
                z = sum(p.weights[j, k] * x[i, k] for k in range(4)) + p.biases[j]
                assert abs(h[i, j] - act(z)) < 1e-12

    def test_dimension_mismatch_rejected(self):
        p = init_hidden_params(3, 4)
        with pytest.raises(ValueError, match="columns"):
            hidden_matrix(p, np.ones((5, 3)))


class TestBatchFit:
    def test_identity_system(self):
        targets = np.random.default_rng(0).normal(size=(6, 2))
        out = batch_fit(np.eye(6), targets)
        np.testing.assert_allclose(out.beta, targets, rtol=1e-13, atol=1e-13)

    def test_recovers_planted_solution(self):
        rng = np.random.default_rng(1)
        h = rng.normal(size=(40, 6))  # overdetermined, full column rank a.s.
        beta_true = rng.normal(size=(6, 3))
        out = batch_fit(h, h @ beta_true)
        np.testing.assert_allclose(out.beta, beta_true, atol=1e-8)

    def test_residual_orthogonal_to_columns(self):
        rng = np.random.default_rng(2)
        h = rng.normal(size=(30, 5))
        t = rng.normal(size=(30, 2))
        beta = batch_fit(h, t).beta
        assert np.linalg.norm(h.T @ (h @ beta - t)) < 1e-8

    def test_ridge_matches_normal_equations(self):
        rng = np.random.default_rng(3)
        h = rng.normal(size=(25, 4))
        t = rng.normal(size=(25, 2))
        lam = 1e-3
        beta = batch_fit(h, t, ridge=lam).beta
        expected = np.linalg.solve(h.T @ h + lam * np.eye(4), h.T @ t)
        np.testing.assert_allclose(beta, expected, rtol=1e-10)

    def test_nonfinite_rejected(self):
        h = np.ones((3, 2))
        h[0, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            batch_fit(h, np.ones((3, 1)))


class TestPredict:
    def test_zero_beta_zero_output(self):
        m = _model()
        m = ElmModel(
            hidden=m.hidden,
            output=OutputWeights(beta=np.zeros((6, 3))),
            output_dim=3,
        )
        assert np.all(predict(m, np.ones(4)) == 0)

    def test_single_node_hand_computation(self):
        p = init_hidden_params(1, 3, "sigmoid", 9)
        beta = np.array([[2.5]])
        m = ElmModel(hidden=p, output=OutputWeights(beta=beta), output_dim=1)
        x = np.array([0.3, -1.2, 0.7])
        z = float(p.weights[0] @ x + p.biases[0])
        expected = 2.5 / (1.0 + np.exp(-z))
        assert abs(predict(m, x)[0] - expected) < 1e-12

    def test_batch_equals_rowwise(self):
        # batched and single-row matmul may differ in the last ulp
        m = _model(seed=4)
        x = np.random.default_rng(5).normal(size=(10, 4))
        batch = predict_batch(m, x)
        rows = np.array([predict(m, row) for row in x])
        np.testing.assert_allclose(batch, rows, rtol=1e-12, atol=1e-14)

    def test_linear_in_beta(self):
        p = init_hidden_params(5, 4, "sigmoid", 6)
        rng = np.random.default_rng(7)
        b1, b2 = rng.normal(size=(5, 2)), rng.normal(size=(5, 2))
        x = rng.normal(size=4)
        m1 = ElmModel(hidden=p, output=OutputWeights(beta=b1), output_dim=2)
        m2 = ElmModel(hidden=p, output=OutputWeights(beta=b2), output_dim=2)
        m12 = ElmModel(hidden=p, output=OutputWeights(beta=b1 + b2), output_dim=2)
        np.testing.assert_allclose(
            predict(m12, x), predict(m1, x) + predict(m2, x), rtol=1e-12
        )

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError, match="length"):
            predict(_model(), np.ones(5))


class TestSerialization:
    def test_roundtrip_bitwise(self):
        m = _model(seed=13, activation="tanh")
        loaded = load_model(save_model(m))
        assert np.array_equal(loaded.hidden.weights, m.hidden.weights)
        assert np.array_equal(loaded.hidden.biases, m.hidden.biases)
        assert np.array_equal(loaded.output.beta, m.output.beta)
        assert loaded.hidden.activation == "tanh"
        assert loaded.output_dim == m.output_dim
        assert loaded.hidden.n_hidden == m.hidden.n_hidden
        assert loaded.hidden.n_inputs == m.hidden.n_inputs

    def test_truncated_payload_rejected(self):
        data = save_model(_model())
        with pytest.raises(ModelFormatError, match="truncated"):
            load_model(data[:-8])

    def test_header_only_rejected(self):
        data = save_model(_model())
        with pytest.raises(ModelFormatError):
            load_model(data[:10])

    def test_trailing_bytes_rejected(self):
        data = save_model(_model())
        with pytest.raises(ModelFormatError, match="trailing"):
            load_model(data + b"\x00")

    def test_bad_magic_rejected(self):
        data = bytearray(save_model(_model()))
        data[:4] = b"NOPE"
        with pytest.raises(ModelFormatError, match="magic"):
            load_model(bytes(data))

    def test_version_mismatch_rejected(self):
        data = bytearray(save_model(_model()))
        data[4:6] = (99).to_bytes(2, "little")
        with pytest.raises(UnsupportedVersionError, match="99"):
            load_model(bytes(data))
