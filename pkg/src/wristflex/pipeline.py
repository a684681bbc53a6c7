"""End-to-end online training over an aligned sample stream.

Stage one: the calibration span (random wrist rotations) feeds the
node-count search, then the supervised remainder is split by the
training fraction -- the model updates chunk by chunk through the
cutoff and is frozen there. Stage two: everything after the cutoff is
estimated from voltages alone; the angle stream past the cutoff serves
only as ground truth for whoever evaluates the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .alignment import AlignedSample
from .elm import ElmModel, init_hidden_params, predict_batch
from .errors import InsufficientDataError
from .oselm import (
    DEFAULT_RIDGE,
    OselmState,
    default_init_block,
    oselm_init,
    run_updates,
    to_model,
)
from .pso import PsoConfig, PsoResult, fitness_node_count, pso_search


@dataclass(frozen=True)
class OnlineConfig:
    calibration_span_s: float = 10.0
    training_fraction: float = 0.25
    chunk_size: int = 1
    activation: str = "sigmoid"
    ridge: float = DEFAULT_RIDGE
    seed: int = 0
    pso: PsoConfig = field(default_factory=PsoConfig)
    n_hidden: int | None = None  # set to skip the node-count search

    def __post_init__(self):
        if not 0 < self.training_fraction <= 1:
            raise ValueError("training_fraction must be in (0, 1]")
        if self.calibration_span_s < 0:
            raise ValueError("calibration_span_s must be >= 0")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")


@dataclass
class RunResult:
    state: OselmState
    model: ElmModel
    chosen_n: int
    pso: PsoResult | None
    n_calib: int
    n_train: int
    init_block: int
    cutoff_ms: int  # timestamp of the last training sample
    estimates: np.ndarray  # (k, 4): t_ms, theta_x, theta_y, theta_z


def derive_seeds(seed: int) -> tuple[int, int]:
    """Split one run seed into (search seed, hidden-draw seed)."""
    s = np.random.SeedSequence(seed).generate_state(2)
    return int(s[0]), int(s[1])


def run_online(stream: list[AlignedSample], config: OnlineConfig) -> RunResult:
    """Calibrate, train online through the cutoff, then estimate the rest."""
    if not stream:
        raise InsufficientDataError("empty sample stream")
    m = stream[0].voltages.shape[0]
    pso_seed, hidden_seed = derive_seeds(config.seed)

    cal_ms = round(config.calibration_span_s * 1000)
    n_calib = sum(1 for s in stream if s.t < cal_ms)
    calib = stream[:n_calib]
    post = stream[n_calib:]

    pso_result = None
    if config.n_hidden is not None:
        chosen_n = config.n_hidden
    else:
        lo, hi = config.pso.bounds
        hi = min(hi, int(0.8 * n_calib))
        if hi < lo:
            raise InsufficientDataError(
                f"{n_calib} calibration samples cannot support the node search "
                f"(need at least {math.ceil(lo / 0.8)})"
            )
        pso_cfg = replace(config.pso, bounds=(lo, hi), seed=pso_seed)
        pso_result = pso_search(
            lambda n: fitness_node_count(
                calib, n, hidden_seed, config.activation, config.ridge
            ),
            pso_cfg,
        )
        chosen_n = pso_result.best_n

    n_post = len(post)
    n_train = int(config.training_fraction * n_post)
    n0 = default_init_block(chosen_n)
    if n_train < n0:
        raise InsufficientDataError(
            f"training span has {n_train} samples but initialization of "
            f"{chosen_n} hidden nodes needs {n0}"
        )

    x = np.asarray([s.voltages for s in post], dtype=np.float64)
    y = np.asarray([s.theta_avg for s in post], dtype=np.float64)
    params = init_hidden_params(chosen_n, m, config.activation, hidden_seed)
    state = oselm_init(params, x[:n0], y[:n0], config.ridge)
    state = run_updates(state, x[n0:n_train], y[n0:n_train], config.chunk_size)
    model = to_model(state)

    if n_train < n_post:
        preds = predict_batch(model, x[n_train:])
        times = np.array([s.t for s in post[n_train:]], dtype=np.float64)
        estimates = np.column_stack([times, preds])
    else:
        estimates = np.empty((0, 4))

    return RunResult(
        state=state,
        model=model,
        chosen_n=chosen_n,
        pso=pso_result,
        n_calib=n_calib,
        n_train=n_train,
        init_block=n0,
        cutoff_ms=post[n_train - 1].t,
        estimates=estimates,
    )
