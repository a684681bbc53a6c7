"""Online-sequential training of the random-feature network.

Training state is the pair (beta, M) where M is the inverse of the
regularized Gram matrix K = sum(H'H) + ridge*I of all hidden-feature
rows seen so far. Initialization solves the first block directly;
every later chunk updates M through the matrix-inversion lemma, so a
chunk of N_k rows costs one N_k x N_k inverse instead of an N x N one
and no sample history is kept. After any sequence of updates beta
matches the ridge-regularized batch solve on the concatenated data.

States are immutable; each update returns a new one. The per-chunk
arithmetic lives in _kernels (numba-compiled by default).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .elm import ElmModel, HiddenParams, OutputWeights, _decode, _encode, hidden_matrix
from .errors import IllConditionedError, ModelFormatError

DEFAULT_RIDGE = 1e-6

_COND_LIMIT = 1e12


def default_init_block(n_hidden: int) -> int:
    """Default initialization block size: comfortably overdetermined."""
    return max(2 * n_hidden, n_hidden + 5)


@dataclass(frozen=True)
class OselmState:
    """Snapshot of the online trainer after some number of chunks."""

    hidden: HiddenParams
    beta: np.ndarray  # (n_hidden, d)
    m_inv: np.ndarray  # (n_hidden, n_hidden), symmetric
    chunks_seen: int
    samples_seen: int

    def __post_init__(self):
        for name in ("beta", "m_inv"):
            a = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            a.flags.writeable = False
            object.__setattr__(self, name, a)


def _validate_block(params: HiddenParams, inputs: np.ndarray,
                    targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if inputs.ndim != 2 or targets.ndim != 2:
        raise ValueError("inputs and targets must be 2-D")
    if inputs.shape[0] != targets.shape[0]:
        raise ValueError(
            f"row mismatch: {inputs.shape[0]} inputs vs {targets.shape[0]} targets"
        )
    if inputs.shape[1] != params.n_inputs:
        raise ValueError(
            f"inputs have {inputs.shape[1]} columns, hidden layer expects "
            f"{params.n_inputs}"
        )
    if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
        raise ValueError("inputs and targets must be finite")
    return inputs, targets


def oselm_init(params: HiddenParams, inputs0: np.ndarray, targets0: np.ndarray,
               ridge: float = DEFAULT_RIDGE) -> OselmState:
    """Solve the first block directly and seed the recursion.

    The block must have at least n_hidden rows; the regularized Gram
    matrix is additionally screened by condition number so a nearly
    rank-deficient start fails loudly instead of poisoning every later
    update.
    """
    inputs0, targets0 = _validate_block(params, inputs0, targets0)
    n0 = inputs0.shape[0]
    if n0 < params.n_hidden:
        raise IllConditionedError(
            f"initialization block of {n0} samples cannot determine "
            f"{params.n_hidden} hidden nodes; use a larger block or fewer nodes"
        )
    h0 = hidden_matrix(params, inputs0)
    k0 = h0.T @ h0 + ridge * np.eye(params.n_hidden)
    if np.linalg.cond(k0) > _COND_LIMIT:
        raise IllConditionedError(
            "initial Gram matrix is ill-conditioned beyond ridge repair; "
            "use a larger initialization block or fewer hidden nodes"
        )
    m_inv = np.linalg.inv(k0)
    m_inv = 0.5 * (m_inv + m_inv.T)
    beta = m_inv @ (h0.T @ targets0)
    if not (np.all(np.isfinite(m_inv)) and np.all(np.isfinite(beta))):
        raise IllConditionedError("initialization produced non-finite state")
    return OselmState(
        hidden=params, beta=beta, m_inv=m_inv, chunks_seen=1, samples_seen=n0
    )


def _apply_kernel(state: OselmState, h: np.ndarray, targets: np.ndarray,
                  chunk_size: int | None) -> tuple[np.ndarray, np.ndarray, int]:
    m_inv = state.m_inv.copy()
    beta = state.beta.copy()
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            if chunk_size is None:
                m_inv, beta = _kernels.update_chunk(m_inv, beta, h, targets)
                n_chunks = 1
            else:
                m_inv, beta = _kernels.run_chunks(m_inv, beta, h, targets, chunk_size)
                n_chunks = -(-h.shape[0] // chunk_size)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"chunk update failed: {exc}") from exc
    if not (np.all(np.isfinite(m_inv)) and np.all(np.isfinite(beta))):
        raise IllConditionedError("chunk update produced non-finite state")
    return m_inv, beta, n_chunks


def oselm_update(state: OselmState, inputs_k: np.ndarray,
                 targets_k: np.ndarray) -> OselmState:
    """Fold one chunk of samples into the state."""
    inputs_k, targets_k = _validate_block(state.hidden, inputs_k, targets_k)
    if inputs_k.shape[0] < 1:
        raise ValueError("chunk must contain at least one sample")
    if targets_k.shape[1] != state.beta.shape[1]:
        raise ValueError(
            f"targets have {targets_k.shape[1]} columns, model outputs "
            f"{state.beta.shape[1]}"
        )
    h = hidden_matrix(state.hidden, inputs_k)
    m_inv, beta, _ = _apply_kernel(state, h, targets_k, None)
    return OselmState(
        hidden=state.hidden,
        beta=beta,
        m_inv=m_inv,
        chunks_seen=state.chunks_seen + 1,
        samples_seen=state.samples_seen + inputs_k.shape[0],
    )


def run_updates(state: OselmState, inputs: np.ndarray, targets: np.ndarray,
                chunk_size: int = 1) -> OselmState:
    """Fold a whole sample block into the state, chunk_size rows at a time.

    Equivalent to repeated oselm_update calls but the chunk loop runs
    inside the compiled kernel.
    """
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    inputs, targets = _validate_block(state.hidden, inputs, targets)
    if inputs.shape[0] == 0:
        return state
    if targets.shape[1] != state.beta.shape[1]:
        raise ValueError(
            f"targets have {targets.shape[1]} columns, model outputs "
            f"{state.beta.shape[1]}"
        )
    h = np.ascontiguousarray(hidden_matrix(state.hidden, inputs))
    m_inv, beta, n_chunks = _apply_kernel(state, h, targets, chunk_size)
    return OselmState(
        hidden=state.hidden,
        beta=beta,
        m_inv=m_inv,
        chunks_seen=state.chunks_seen + n_chunks,
        samples_seen=state.samples_seen + inputs.shape[0],
    )


def to_model(state: OselmState) -> ElmModel:
    """Freeze the current beta into a standalone prediction model."""
    return ElmModel(
        hidden=state.hidden,
        output=OutputWeights(beta=state.beta.copy()),
        output_dim=state.beta.shape[1],
    )


def save_state(state: OselmState) -> bytes:
    """Serialize a resumable training state (model container + extension)."""
    return _encode(
        to_model(state),
        m_inv=state.m_inv,
        chunks_seen=state.chunks_seen,
        samples_seen=state.samples_seen,
    )


def load_state(data: bytes) -> OselmState:
    """Deserialize a resumable training state."""
    model, extension = _decode(data)
    if extension is None:
        raise ModelFormatError("container has no online-training extension")
    m_inv, chunks_seen, samples_seen = extension
    return OselmState(
        hidden=model.hidden,
        beta=model.output.beta.copy(),
        m_inv=m_inv.copy(),
        chunks_seen=chunks_seen,
        samples_seen=samples_seen,
    )
