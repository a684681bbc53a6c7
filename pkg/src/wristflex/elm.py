"""Random-feature single-hidden-layer network (extreme learning machine).

Hidden weights and biases are drawn once, uniform on [-1, 1], and never
trained; only the hidden-to-output weights beta are fitted, by linear
least squares. The hidden feature of node j for input row x is

    phi_j(x) = act(a_j . x + b_j)

Models serialize to a small versioned binary container (byte layout in
the README) that roundtrips bit-exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ModelFormatError, UnsupportedVersionError


def _sigmoid(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


ACTIVATIONS = {
    "sigmoid": _sigmoid,
    "tanh": np.tanh,
}

_ACTIVATION_TAGS = {"sigmoid": 0, "tanh": 1}
_TAG_ACTIVATIONS = {v: k for k, v in _ACTIVATION_TAGS.items()}

_MAGIC = b"WFLX"
_VERSION = 1
_HEADER = struct.Struct("<4sHBBIII")  # magic, version, activation, flags, N, m, d
_FLAG_STATE = 0x01  # container carries the online-training extension


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HiddenParams:
    """Fixed random hidden layer: one weight row and bias per node."""

    weights: np.ndarray  # (n_hidden, n_inputs)
    biases: np.ndarray  # (n_hidden,)
    activation: str
    n_hidden: int
    n_inputs: int

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"unknown activation {self.activation!r}; "
                f"choose from {sorted(ACTIVATIONS)}"
            )
        if self.n_hidden < 1 or self.n_inputs < 1:
            raise ValueError("n_hidden and n_inputs must be >= 1")
        if self.weights.shape != (self.n_hidden, self.n_inputs):
            raise ValueError(
                f"weights shape {self.weights.shape} != "
                f"({self.n_hidden}, {self.n_inputs})"
            )
        if self.biases.shape != (self.n_hidden,):
            raise ValueError(f"biases shape {self.biases.shape} != ({self.n_hidden},)")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ValueError("hidden parameters must be finite")
        object.__setattr__(self, "weights", _readonly(self.weights))
        object.__setattr__(self, "biases", _readonly(self.biases))


@dataclass(frozen=True)
class OutputWeights:
    """Hidden-to-output weights beta, shape (n_hidden, output_dim)."""

    beta: np.ndarray

    def __post_init__(self):
        if self.beta.ndim != 2:
            raise ValueError(f"beta must be 2-D, got shape {self.beta.shape}")
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("beta must be finite")
        object.__setattr__(self, "beta", _readonly(self.beta))


@dataclass(frozen=True)
class ElmModel:
    """A hidden layer plus fitted output weights."""

    hidden: HiddenParams
    output: OutputWeights
    output_dim: int

    def __post_init__(self):
        n, d = self.output.beta.shape
        if n != self.hidden.n_hidden:
            raise ValueError(
                f"beta has {n} rows but hidden layer has "
                f"{self.hidden.n_hidden} nodes"
            )
        if d != self.output_dim:
            raise ValueError(f"beta has {d} columns, output_dim is {self.output_dim}")


def init_hidden_params(n_hidden: int, n_inputs: int, activation: str = "sigmoid",
                       seed: int = 0) -> HiddenParams:
    """Draw hidden weights and biases uniform on [-1, 1], reproducibly."""
    if n_hidden < 1 or n_inputs < 1:
        raise ValueError("n_hidden and n_inputs must be >= 1")
    rng = np.random.default_rng(seed)
    weights = rng.uniform(-1.0, 1.0, size=(n_hidden, n_inputs))
    biases = rng.uniform(-1.0, 1.0, size=n_hidden)
    return HiddenParams(
        weights=weights,
        biases=biases,
        activation=activation,
        n_hidden=n_hidden,
        n_inputs=n_inputs,
    )


def hidden_matrix(params: HiddenParams, inputs: np.ndarray) -> np.ndarray:
    """Hidden-layer output matrix: entry (i, j) = act(a_j . x_i + b_j)."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2:
        raise ValueError(f"inputs must be 2-D, got shape {inputs.shape}")
    if inputs.shape[1] != params.n_inputs:
        raise ValueError(
            f"inputs have {inputs.shape[1]} columns, hidden layer expects "
            f"{params.n_inputs}"
        )
    z = inputs @ params.weights.T + params.biases
    return ACTIVATIONS[params.activation](z)


def batch_fit(H: np.ndarray, targets: np.ndarray, ridge: float = 0.0) -> OutputWeights:
    """Least-squares fit of H beta = targets.

    With ridge == 0 this is the minimum-norm solution (SVD-based); with
    ridge > 0 it solves the regularized normal equations
    (H'H + ridge*I) beta = H'targets, which is the closed form the
    online recursion converges to.
    """
    H = np.asarray(H, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if H.ndim != 2 or targets.ndim != 2:
        raise ValueError("H and targets must be 2-D")
    if H.shape[0] != targets.shape[0] or H.shape[0] < 1:
        raise ValueError(
            f"row mismatch: H has {H.shape[0]} rows, targets {targets.shape[0]}"
        )
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(targets))):
        raise ValueError("H and targets must be finite")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    if ridge == 0.0:
        beta, *_ = np.linalg.lstsq(H, targets, rcond=None)
    else:
        n = H.shape[1]
        beta = np.linalg.solve(H.T @ H + ridge * np.eye(n), H.T @ targets)
    return OutputWeights(beta=beta)


def predict(model: ElmModel, x: np.ndarray) -> np.ndarray:
    """Estimate the output vector for a single input row."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.hidden.n_inputs:
        raise ValueError(
            f"input must be a vector of length {model.hidden.n_inputs}, "
            f"got shape {x.shape}"
        )
    h = hidden_matrix(model.hidden, x[np.newaxis, :])
    return (h @ model.output.beta)[0]


def predict_batch(model: ElmModel, inputs: np.ndarray) -> np.ndarray:
    """Estimate outputs for a batch of input rows, shape (n, output_dim)."""
    return hidden_matrix(model.hidden, inputs) @ model.output.beta


# --- serialization ---------------------------------------------------------
#
# Little-endian throughout; float64 arrays stored row-major right after the
# header, in declaration order. The optional state extension (flag bit 0)
# appends the N x N inverse-covariance matrix and two u64 counters so online
# training can resume.


def _encode(model: ElmModel, m_inv: np.ndarray | None = None,
            chunks_seen: int = 0, samples_seen: int = 0) -> bytes:
    hp = model.hidden
    flags = _FLAG_STATE if m_inv is not None else 0
    parts = [
        _HEADER.pack(
            _MAGIC,
            _VERSION,
            _ACTIVATION_TAGS[hp.activation],
            flags,
            hp.n_hidden,
            hp.n_inputs,
            model.output_dim,
        ),
        np.ascontiguousarray(hp.weights, dtype="<f8").tobytes(),
        np.ascontiguousarray(hp.biases, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.output.beta, dtype="<f8").tobytes(),
    ]
    if m_inv is not None:
        parts.append(np.ascontiguousarray(m_inv, dtype="<f8").tobytes())
        parts.append(struct.pack("<QQ", chunks_seen, samples_seen))
    return b"".join(parts)


def _take(buf: bytes, offset: int, nbytes: int, what: str) -> tuple[bytes, int]:
    if offset + nbytes > len(buf):
        raise ModelFormatError(
            f"truncated container: needed {nbytes} bytes for {what}, "
            f"{len(buf) - offset} left"
        )
    return buf[offset:offset + nbytes], offset + nbytes


def _decode(data: bytes):
    if len(data) < _HEADER.size:
        raise ModelFormatError("container shorter than header")
    magic, version, act_tag, flags, n, m, d = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}")
    if version != _VERSION:
        raise UnsupportedVersionError(
            f"container version {version}, this build reads {_VERSION}"
        )
    if act_tag not in _TAG_ACTIVATIONS:
        raise ModelFormatError(f"unknown activation tag {act_tag}")
    if n < 1 or m < 1 or d < 1:
        raise ModelFormatError(f"bad dimensions N={n} m={m} d={d}")

    off = _HEADER.size
    raw, off = _take(data, off, 8 * n * m, "weights")
    weights = np.frombuffer(raw, dtype="<f8").reshape(n, m)
    raw, off = _take(data, off, 8 * n, "biases")
    biases = np.frombuffer(raw, dtype="<f8")
    raw, off = _take(data, off, 8 * n * d, "beta")
    beta = np.frombuffer(raw, dtype="<f8").reshape(n, d)

    extension = None
    if flags & _FLAG_STATE:
        raw, off = _take(data, off, 8 * n * n, "inverse covariance")
        m_inv = np.frombuffer(raw, dtype="<f8").reshape(n, n)
        raw, off = _take(data, off, 16, "counters")
        chunks_seen, samples_seen = struct.unpack("<QQ", raw)
        extension = (m_inv, chunks_seen, samples_seen)
    if off != len(data):
        raise ModelFormatError(f"{len(data) - off} trailing bytes after payload")

    model = ElmModel(
        hidden=HiddenParams(
            weights=weights.copy(),
            biases=biases.copy(),
            activation=_TAG_ACTIVATIONS[act_tag],
            n_hidden=n,
            n_inputs=m,
        ),
        output=OutputWeights(beta=beta.copy()),
        output_dim=d,
    )
    return model, extension


def save_model(model: ElmModel) -> bytes:
    """Serialize a model to the versioned binary container."""
    return _encode(model)


def load_model(data: bytes) -> ElmModel:
    """Deserialize a model; raises ModelFormatError on malformed bytes."""
    model, _ = _decode(data)
    return model
