"""Online recursion against the regularized batch solve, its one true oracle."""

import numpy as np
import pytest

from wristflex.elm import batch_fit, hidden_matrix, init_hidden_params, load_model
from wristflex.errors import IllConditionedError, ModelFormatError
from wristflex.oselm import (
    DEFAULT_RIDGE,
    default_init_block,
    load_state,
    oselm_init,
    oselm_update,
    run_updates,
    save_state,
    to_model,
)


def _instance(seed, n=8, m=4, total=120, d=3):
    rng = np.random.default_rng(seed)
    params = init_hidden_params(n, m, "sigmoid", seed)
    x = rng.uniform(0, 3.3, size=(total, m))
    beta_true = rng.normal(size=(n, d))
    y = hidden_matrix(params, x) @ beta_true + 0.01 * rng.normal(size=(total, d))
    return params, x, y


def _oracle_beta(params, x, y, ridge=DEFAULT_RIDGE):
    """Ridge-regularized batch solve over all data seen."""
    h = hidden_matrix(params, x)
    return np.linalg.solve(
        h.T @ h + ridge * np.eye(params.n_hidden), h.T @ y
    )


def _rel_frobenius(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-30)


class TestInit:
    def test_matches_ridged_batch_fit(self):
        params, x, y = _instance(0)
        n0 = default_init_block(params.n_hidden)
        state = oselm_init(params, x[:n0], y[:n0])
        h0 = hidden_matrix(params, x[:n0])
        expected = batch_fit(h0, y[:n0], ridge=DEFAULT_RIDGE).beta
        assert _rel_frobenius(state.beta, expected) < 1e-6

    def test_m_inv_is_gram_inverse(self):
        params, x, y = _instance(1)
        n0 = 20
        state = oselm_init(params, x[:n0], y[:n0])
        h0 = hidden_matrix(params, x[:n0])
        k0 = h0.T @ h0 + DEFAULT_RIDGE * np.eye(params.n_hidden)
        identity = state.m_inv @ k0
        assert np.max(np.abs(identity - np.eye(params.n_hidden))) < 1e-6

    def test_block_smaller_than_nodes_rejected(self):
        params, x, y = _instance(2, n=10)
        with pytest.raises(IllConditionedError, match="block"):
            oselm_init(params, x[:6], y[:6])

    def test_counters(self):
        params, x, y = _instance(3)
        state = oselm_init(params, x[:20], y[:20])
        assert state.chunks_seen == 1
        assert state.samples_seen == 20


class TestUpdate:
    @pytest.mark.parametrize("chunk_size", [1, 7, 50, None])
    def test_beta_matches_batch_oracle(self, chunk_size):
        params, x, y = _instance(4, total=200)
        n0 = 20
        state = oselm_init(params, x[:n0], y[:n0])
        if chunk_size is None:  # everything in one chunk
            state = oselm_update(state, x[n0:], y[n0:])
        else:
            for lo in range(n0, 200, chunk_size):
                state = oselm_update(
                    state, x[lo:lo + chunk_size], y[lo:lo + chunk_size]
                )
        assert _rel_frobenius(state.beta, _oracle_beta(params, x, y)) < 1e-6

    def test_woodbury_identity_after_every_update(self):
        params, x, y = _instance(5, total=80)
        n0 = 20
        state = oselm_init(params, x[:n0], y[:n0])
        eye = np.eye(params.n_hidden)
        for lo in range(n0, 80):
            state = oselm_update(state, x[lo:lo + 1], y[lo:lo + 1])
            h = hidden_matrix(params, x[:lo + 1])
            k = h.T @ h + DEFAULT_RIDGE * eye
            assert np.max(np.abs(state.m_inv @ k - eye)) < 1e-6

    def test_chunk_associativity(self):
        params, x, y = _instance(6, total=150)
        rng = np.random.default_rng(99)
        n0 = 20
        finals = []
        for _ in range(2):
            state = oselm_init(params, x[:n0], y[:n0])
            lo = n0
            while lo < 150:
                step = int(rng.integers(1, 30))
                state = oselm_update(state, x[lo:lo + step], y[lo:lo + step])
                lo += step
            finals.append(state.beta)
        assert _rel_frobenius(finals[0], finals[1]) < 1e-6

    def test_repeated_sample_matches_duplicated_batch(self):
        params, x, y = _instance(7, total=40)
        state = oselm_init(params, x[:30], y[:30])
        state = oselm_update(state, x[29:30], y[29:30])  # exact repeat
        x_dup = np.vstack([x[:30], x[29:30]])
        y_dup = np.vstack([y[:30], y[29:30]])
        assert _rel_frobenius(state.beta, _oracle_beta(params, x_dup, y_dup)) < 1e-6

    def test_m_inv_symmetric(self):
        params, x, y = _instance(8)
        state = oselm_init(params, x[:20], y[:20])
        state = oselm_update(state, x[20:50], y[20:50])
        assert np.max(np.abs(state.m_inv - state.m_inv.T)) < 1e-8

    def test_run_updates_equals_sequential(self):
        params, x, y = _instance(9, total=100)
        n0 = 20
        a = oselm_init(params, x[:n0], y[:n0])
        b = a
        a = run_updates(a, x[n0:], y[n0:], chunk_size=7)
        for lo in range(n0, 100, 7):
            b = oselm_update(b, x[lo:lo + 7], y[lo:lo + 7])
        np.testing.assert_allclose(a.beta, b.beta, rtol=1e-12, atol=1e-12)
        assert a.chunks_seen == b.chunks_seen
        assert a.samples_seen == b.samples_seen

    def test_empty_block_is_identity(self):
        params, x, y = _instance(10)
        state = oselm_init(params, x[:20], y[:20])
        same = run_updates(state, x[:0], y[:0])
        assert same is state

    def test_nonfinite_rejected(self):
        params, x, y = _instance(11)
        state = oselm_init(params, x[:20], y[:20])
        bad = x[20:21].copy()
        bad[0, 0] = np.inf
        with pytest.raises(ValueError, match="finite"):
            oselm_update(state, bad, y[20:21])

    def test_wrong_width_rejected(self):
        params, x, y = _instance(12)
        state = oselm_init(params, x[:20], y[:20])
        with pytest.raises(ValueError, match="columns"):
            oselm_update(state, x[20:22, :3], y[20:22])


class TestStateSerialization:
    def test_roundtrip(self):
        params, x, y = _instance(13)
        state = oselm_init(params, x[:20], y[:20])
        state = oselm_update(state, x[20:60], y[20:60])
        loaded = load_state(save_state(state))
        assert np.array_equal(loaded.beta, state.beta)
        assert np.array_equal(loaded.m_inv, state.m_inv)
        assert loaded.chunks_seen == state.chunks_seen
        assert loaded.samples_seen == state.samples_seen

    def test_resumed_training_continues_exactly(self):
        params, x, y = _instance(14, total=80)
        state = oselm_init(params, x[:20], y[:20])
        state = oselm_update(state, x[20:50], y[20:50])
        resumed = load_state(save_state(state))
        a = oselm_update(state, x[50:], y[50:])
        b = oselm_update(resumed, x[50:], y[50:])
        np.testing.assert_array_equal(a.beta, b.beta)

    def test_state_bytes_load_as_plain_model(self):
        params, x, y = _instance(15)
        state = oselm_init(params, x[:20], y[:20])
        model = load_model(save_state(state))
        assert np.array_equal(model.output.beta, state.beta)

    def test_plain_model_bytes_rejected_as_state(self):
        from wristflex.elm import save_model

        params, x, y = _instance(16)
        state = oselm_init(params, x[:20], y[:20])
        with pytest.raises(ModelFormatError, match="extension"):
            load_state(save_model(to_model(state)))
