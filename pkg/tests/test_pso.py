"""Node-count fitness and the swarm search."""

import numpy as np
import pytest

from wristflex.alignment import AlignedSample
from wristflex.errors import InsufficientDataError
from wristflex.pso import PsoConfig, fitness_node_count, pso_search


def _calib_samples(n=100, seed=0, target_scale=30.0):
    """Smooth voltage stream with a target the features can represent."""
    rng = np.random.default_rng(seed)
    t = np.arange(n) * 0.2
    v = np.empty((n, 4))
    for j in range(4):
        v[:, j] = 1.65 + 0.5 * np.sin(2 * np.pi * 0.1 * t + j) \
            + 0.2 * np.sin(2 * np.pi * 0.23 * t + 2 * j)
    theta_y = target_scale * (v[:, 0] - v[:, 2]) / 1.0
    theta = np.column_stack([0.1 * theta_y, theta_y, np.zeros(n)])
    _ = rng  # reserved for noisy variants
    return [
        AlignedSample(t=int(1000 * tk), voltages=v[k], theta_avg=theta[k])
        for k, tk in enumerate(t)
    ]


class TestFitnessNodeCount:
    def test_realizable_target_fits_tightly(self):
        calib = _calib_samples()
        scale = np.std([s.theta_avg[1] for s in calib])
        rmse = fitness_node_count(calib, 40, seed=1)
        assert rmse < 1e-3 * scale

    def test_deterministic(self):
        calib = _calib_samples()
        a = fitness_node_count(calib, 12, seed=3)
        b = fitness_node_count(calib, 12, seed=3)
        assert a == b

    def test_seed_changes_result(self):
        calib = _calib_samples()
        assert fitness_node_count(calib, 12, 3) != fitness_node_count(calib, 12, 4)

    def test_too_many_nodes_rejected_with_minimum(self):
        calib = _calib_samples(n=20)  # 16 training samples
        with pytest.raises(InsufficientDataError, match=r"\b25\b"):
            fitness_node_count(calib, 20, seed=0)


def _counting(fn):
    calls = {"n": 0}

    def wrapped(n):
        calls["n"] += 1
        return fn(n)

    return wrapped, calls


class TestPsoSearch:
    def test_degenerate_interval(self):
        fn, calls = _counting(lambda n: float(n))
        res = pso_search(fn, PsoConfig(bounds=(9, 9), seed=0))
        assert res.best_n == 9
        assert calls["n"] == 1  # memoized across all particles

    def test_known_convex_optimum(self):
        res = pso_search(lambda n: (n - 12) ** 2, PsoConfig(bounds=(1, 40), seed=0))
        assert res.best_n == 12
        assert res.best_fitness == 0

    def test_memoization_bounds_evaluations(self):
        fn, calls = _counting(lambda n: (n - 7) ** 2)
        pso_search(fn, PsoConfig(bounds=(1, 40), seed=1))
        assert calls["n"] <= 40

    def test_evaluations_stay_in_bounds(self):
        seen = []

        def fn(n):
            seen.append(n)
            return abs(n - 20)

        pso_search(fn, PsoConfig(bounds=(5, 35), seed=2))
        assert all(5 <= n <= 35 for n in seen)

    def test_gbest_never_worsens(self):
        res = pso_search(lambda n: np.sin(n) + 0.01 * n,
                         PsoConfig(bounds=(1, 60), seed=3))
        trace = res.gbest_trace
        assert all(b <= a for a, b in zip(trace, trace[1:]))

    def test_reproducible_trajectory(self):
        cfg = PsoConfig(bounds=(1, 50), seed=4)
        a = pso_search(lambda n: (n - 31) ** 2 + (n % 3), cfg)
        b = pso_search(lambda n: (n - 31) ** 2 + (n % 3), cfg)
        assert a.best_n == b.best_n
        assert a.gbest_trace == b.gbest_trace

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PsoConfig(swarm_size=1)
        with pytest.raises(ValueError):
            PsoConfig(bounds=(10, 5))
        with pytest.raises(ValueError):
            PsoConfig(bounds=(0, 5))
        with pytest.raises(ValueError):
            PsoConfig(inertia=0.0)
