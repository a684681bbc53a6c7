"""Hidden-node-count selection by particle swarm search.

The search space is a single integer (how many hidden nodes), relaxed
to a continuous position per particle; positions are rounded for
fitness evaluation and the fitness of each integer is memoized, so the
total number of real evaluations never exceeds the width of the bounds
interval. The objective is the validation RMSE of a short online fit
on the calibration window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alignment import AlignedSample
from .elm import init_hidden_params, predict_batch
from .errors import InsufficientDataError
from .oselm import DEFAULT_RIDGE, default_init_block, oselm_init, run_updates, to_model


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 10
    iterations: int = 15
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    bounds: tuple[int, int] = (5, 60)
    seed: int = 0

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        n_min, n_max = self.bounds
        if n_min < 1 or n_min > n_max:
            raise ValueError(f"bad bounds {self.bounds}: need 1 <= n_min <= n_max")
        if min(self.inertia, self.cognitive, self.social) <= 0:
            raise ValueError("inertia, cognitive and social weights must be > 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@dataclass
class Particle:
    position: float
    velocity: float
    best_position: float
    best_fitness: float


@dataclass
class PsoResult:
    best_n: int
    best_fitness: float
    gbest_trace: list[float] = field(default_factory=list)  # per-iteration global best
    n_evaluations: int = 0  # distinct integers actually evaluated


def min_calibration_samples(n: int) -> int:
    """Smallest calibration size whose 80% training side can fit n nodes."""
    return math.ceil(n / 0.8)


def fitness_node_count(calib: list[AlignedSample], n: int, seed: int,
                       activation: str = "sigmoid",
                       ridge: float = DEFAULT_RIDGE) -> float:
    """Validation RMSE (degrees, mid-axis angle) of an n-node online fit.

    Trains on the first 80% of the calibration window and scores the
    remaining 20%. Deterministic given (calib, n, seed).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    n_cal = len(calib)
    n_train = int(0.8 * n_cal)
    n_val = n_cal - n_train
    if n_train < n or n_val < 1:
        raise InsufficientDataError(
            f"{n_cal} calibration samples cannot validate n={n} hidden nodes; "
            f"need at least {min_calibration_samples(n)}"
        )
    x = np.asarray([s.voltages for s in calib], dtype=np.float64)
    y = np.asarray([s.theta_avg for s in calib], dtype=np.float64)
    params = init_hidden_params(n, x.shape[1], activation, seed)
    init_size = min(default_init_block(n), n_train)
    state = oselm_init(params, x[:init_size], y[:init_size], ridge)
    state = run_updates(state, x[init_size:n_train], y[init_size:n_train])
    pred = predict_batch(to_model(state), x[n_train:])
    err = pred[:, 1] - y[n_train:, 1]
    return float(np.sqrt(np.mean(err * err)))


def pso_search(fitness, config: PsoConfig) -> PsoResult:
    """Global-best particle swarm over the integer node count.

    `fitness` maps an integer in bounds to a value to minimize. The
    trajectory is fully reproducible from config.seed; the global best
    never worsens across iterations.
    """
    rng = np.random.default_rng(config.seed)
    lo, hi = config.bounds
    v_max = (hi - lo) / 2.0

    cache: dict[int, float] = {}

    def evaluate(position: float) -> float:
        key = int(np.rint(position))
        if key not in cache:
            cache[key] = float(fitness(key))
        return cache[key]

    swarm = []
    for _ in range(config.swarm_size):
        pos = float(rng.uniform(lo, hi))
        vel = float(rng.uniform(-v_max, v_max))
        swarm.append(Particle(pos, vel, pos, evaluate(pos)))

    best = min(range(len(swarm)), key=lambda i: swarm[i].best_fitness)
    gbest_pos = swarm[best].best_position
    gbest_fit = swarm[best].best_fitness
    trace = [gbest_fit]

    for _ in range(config.iterations):
        for p in swarm:
            r1 = rng.random()
            r2 = rng.random()
            p.velocity = (
                config.inertia * p.velocity
                + config.cognitive * r1 * (p.best_position - p.position)
                + config.social * r2 * (gbest_pos - p.position)
            )
            p.velocity = float(np.clip(p.velocity, -v_max, v_max))
            p.position = float(np.clip(p.position + p.velocity, lo, hi))
            fit = evaluate(p.position)
            if fit < p.best_fitness:
                p.best_fitness = fit
                p.best_position = p.position
        for p in swarm:
            if p.best_fitness < gbest_fit:
                gbest_fit = p.best_fitness
                gbest_pos = p.best_position
        trace.append(gbest_fit)

    return PsoResult(
        best_n=int(np.rint(gbest_pos)),
        best_fitness=gbest_fit,
        gbest_trace=trace,
        n_evaluations=len(cache),
    )
