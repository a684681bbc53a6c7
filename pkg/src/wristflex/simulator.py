"""Synthetic wrist motion and strain-sensor response, emitting replay files.

Stands in for the hardware: a trajectory generator produces wrist
angles over time (seeded random rotations during the calibration span,
then smooth flexion/extension cycles), and a sensor model maps the
flexion angle through per-sensor placement geometry to strain, then
through the piecewise gauge-factor curve to resistance, and finally
through the divider circuit to the voltages written into the strain
replay file. Sensor imperfections -- additive voltage noise, slow
multiplicative baseline drift, and first-order relaxation lag -- are
individually zeroable so the clean pipeline inverts exactly.

Sensors 0..m/2-1 sit on the dorsal side (stretched by flexion),
the rest on the palmar side (stretched by extension).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acquisition import CircuitConfig, voltage_from_resistance


@dataclass(frozen=True)
class TrajectoryConfig:
    duration_s: float = 180.0
    cycle_period_s: float = 8.5
    flexion_peak_deg: float = 60.0
    extension_peak_deg: float = -60.0
    calibration_span_s: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.duration_s <= self.calibration_span_s:
            raise ValueError("duration_s must exceed calibration_span_s")
        if not 5.0 <= self.cycle_period_s <= 10.0:
            raise ValueError(
                f"cycle_period_s must lie in [5, 10], got {self.cycle_period_s}"
            )
        if self.calibration_span_s < 0:
            raise ValueError("calibration_span_s must be >= 0")
        if not -90.0 <= self.extension_peak_deg < self.flexion_peak_deg <= 90.0:
            raise ValueError("need -90 <= extension_peak < flexion_peak <= 90")


@dataclass(frozen=True)
class SensorResponseModel:
    r0: float = 50_000.0  # unstrained resistance; divider midpoint with r_f = 50k
    gf_low: float = 10.3  # gauge factor below the knee
    gf_high: float = 3.3  # gauge factor above the knee
    knee: float = 0.06  # strain fraction where sensitivity drops
    max_strain: float = 0.60
    noise_sd: float = 0.01  # volts, additive per reading
    drift_rate: float = 0.0002  # fraction of baseline lost per second
    relaxation_tau: float = 0.8  # seconds; 0 disables the lag
    placement_gain: tuple[float, ...] = (0.40, 0.35, 0.40, 0.35)
    placement_phase: tuple[float, ...] = (0.0, 0.30, 0.0, -0.30)  # radians

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if self.gf_low <= 0 or self.gf_high <= 0:
            raise ValueError("gauge factors must be positive")
        if not 0 < self.knee < self.max_strain:
            raise ValueError("need 0 < knee < max_strain")
        if len(self.placement_gain) != len(self.placement_phase):
            raise ValueError("placement_gain and placement_phase lengths differ")
        if len(self.placement_gain) < 2 or len(self.placement_gain) % 2:
            raise ValueError("need an even number (>= 2) of sensors")
        if self.noise_sd < 0 or self.drift_rate < 0 or self.relaxation_tau < 0:
            raise ValueError("imperfection parameters must be >= 0")

    @property
    def n_sensors(self) -> int:
        return len(self.placement_gain)


@dataclass(frozen=True)
class StreamTiming:
    strain_frame_period_ms: int = 200  # 4 sensors swept 50 ms apart
    imu_period_ms: int = 30  # 6-7 orientation readings per strain frame

    def __post_init__(self):
        if self.imu_period_ms < 1 or self.strain_frame_period_ms < 1:
            raise ValueError("periods must be >= 1 ms")
        if self.imu_period_ms >= self.strain_frame_period_ms:
            raise ValueError("imu_period_ms must be below strain_frame_period_ms")


class Trajectory:
    """Deterministic wrist-angle signal theta(t) in degrees.

    Calibration span: band-limited random rotation on all three axes
    (a seeded sum of sinusoids, amplitude-bounded). Afterwards the
    flexion axis runs cosine cycles between the two peaks while the
    other axes wander within a couple of degrees.
    """

    _N_COMPONENTS = 6

    def __init__(self, cfg: TrajectoryConfig):
        self.cfg = cfg
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(2)[0])
        amp_cal = 0.75 * min(cfg.flexion_peak_deg, -cfg.extension_peak_deg)
        if amp_cal <= 0:  # peaks on one side of zero: keep a usable swing
            amp_cal = 0.375 * (cfg.flexion_peak_deg - cfg.extension_peak_deg)
        self._cal = [
            self._random_components(rng, peak)
            for peak in (amp_cal / 3.0, amp_cal, amp_cal / 3.0)
        ]
        # small off-axis wander after calibration
        self._wander = [
            (2.0, 0.045, float(rng.uniform(0, 2 * math.pi)),
             1.2, 0.11, float(rng.uniform(0, 2 * math.pi)))
            for _ in range(2)
        ]

    def _random_components(self, rng, peak_deg):
        # hand rotations are slow; keep the band near the cycle rate so the
        # calibration window is representative of the motion that follows
        k = self._N_COMPONENTS
        freqs = rng.uniform(0.05, 0.35, size=k)
        phases = rng.uniform(0.0, 2 * math.pi, size=k)
        amps = rng.uniform(0.3, 1.0, size=k)
        amps *= peak_deg / amps.sum()  # sum of amplitudes bounds the signal
        return amps, freqs, phases

    def angles_deg(self, t_s) -> np.ndarray:
        """Angles (x, y, z) at time t_s (scalar or array of seconds)."""
        t = np.atleast_1d(np.asarray(t_s, dtype=np.float64))
        out = np.zeros((t.size, 3))
        cal = t < self.cfg.calibration_span_s

        for axis in range(3):
            amps, freqs, phases = self._cal[axis]
            tc = t[cal]
            out[cal, axis] = np.sum(
                amps * np.sin(2 * math.pi * np.outer(tc, freqs) + phases), axis=1
            )

        tau = t[~cal] - self.cfg.calibration_span_s
        mid = 0.5 * (self.cfg.flexion_peak_deg + self.cfg.extension_peak_deg)
        amp = 0.5 * (self.cfg.flexion_peak_deg - self.cfg.extension_peak_deg)
        out[~cal, 1] = mid + amp * np.cos(2 * math.pi * tau / self.cfg.cycle_period_s)
        for axis, (a1, f1, p1, a2, f2, p2) in zip((0, 2), self._wander):
            out[~cal, axis] = (
                a1 * np.sin(2 * math.pi * f1 * tau + p1)
                + a2 * np.sin(2 * math.pi * f2 * tau + p2)
            )

        if np.isscalar(t_s) or np.asarray(t_s).ndim == 0:
            return out[0]
        return out


def gen_trajectory(cfg: TrajectoryConfig) -> Trajectory:
    return Trajectory(cfg)


def strain_from_angle(theta_y_deg: float, sensor_index: int,
                      model: SensorResponseModel) -> float:
    """Strain fraction of one sensor at the given flexion angle.

    Dorsal sensors stretch in flexion, palmar in extension; a slack
    sensor reads zero strain.
    """
    if abs(theta_y_deg) > 90.0:
        raise ValueError(f"|theta_y| must be <= 90 degrees, got {theta_y_deg}")
    if not 0 <= sensor_index < model.n_sensors:
        raise ValueError(f"sensor_index {sensor_index} out of range")
    sign = 1.0 if sensor_index < model.n_sensors // 2 else -1.0
    phase = model.placement_phase[sensor_index]
    raw = sign * math.sin(math.radians(theta_y_deg) + phase)
    eps = model.placement_gain[sensor_index] * max(0.0, raw)
    return min(max(eps, 0.0), model.max_strain)


def resistance_from_strain(eps: float, model: SensorResponseModel) -> float:
    """Piecewise gauge-factor response: high sensitivity below the knee."""
    if not 0.0 <= eps <= model.max_strain:
        raise ValueError(
            f"strain {eps} outside [0, {model.max_strain}]"
        )
    if eps <= model.knee:
        dr = model.gf_low * eps
    else:
        dr = model.gf_low * model.knee + model.gf_high * (eps - model.knee)
    return model.r0 * (1.0 + dr)


def sweep_offset_ms(timing: StreamTiming, n_sensors: int) -> int:
    """Midpoint of the sensor sweep relative to the frame timestamp.

    A frame's timestamp marks the start of its sweep; the n sensors are
    read one per sub-slot across the frame period, and since per-sensor
    skew is not modeled the whole frame samples the trajectory once, at
    the middle read time.
    """
    return round(timing.strain_frame_period_ms * (n_sensors - 1) / (2 * n_sensors))


def emit_streams(cfg: TrajectoryConfig, model: SensorResponseModel,
                 timing: StreamTiming, circuit: CircuitConfig,
                 strain_path: str | Path, imu_path: str | Path,
                 quantize_adc: bool = False) -> tuple[int, int]:
    """Write the two replay files on a shared zero-based clock.

    Returns (strain line count, imu line count). With noise, drift and
    relaxation all zero the voltage stream is an exact deterministic
    function of the flexion angle.
    """
    if model.n_sensors != circuit.m_sensors:
        raise ValueError(
            f"sensor model has {model.n_sensors} sensors, circuit expects "
            f"{circuit.m_sensors}"
        )
    traj = gen_trajectory(cfg)
    noise_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(2)[1])
    duration_ms = round(cfg.duration_s * 1000)

    imu_times = np.arange(0, duration_ms, timing.imu_period_ms, dtype=np.int64)
    theta = traj.angles_deg(imu_times / 1000.0)
    with open(imu_path, "w", encoding="ascii") as fh:
        for t, (tx, ty, tz) in zip(imu_times, theta):
            fh.write(f"{t},{tx:.6f},{ty:.6f},{tz:.6f}\n")

    strain_times = np.arange(
        0, duration_ms, timing.strain_frame_period_ms, dtype=np.int64
    )
    offset_ms = sweep_offset_ms(timing, model.n_sensors)
    dt_s = timing.strain_frame_period_ms / 1000.0
    alpha = 1.0 - math.exp(-dt_s / model.relaxation_tau) if model.relaxation_tau > 0 else 1.0
    r_state = np.zeros(model.n_sensors)
    lsb = circuit.vcc / circuit.adc_max_count

    with open(strain_path, "w", encoding="ascii") as fh:
        for k, t in enumerate(strain_times):
            t_sample = (t + offset_ms) / 1000.0
            theta_y = float(traj.angles_deg(t_sample)[1])
            target = np.array([
                resistance_from_strain(strain_from_angle(theta_y, i, model), model)
                for i in range(model.n_sensors)
            ])
            if k == 0:
                r_state = target
            else:
                r_state = r_state + alpha * (target - r_state)
            r_out = r_state * math.exp(-model.drift_rate * t_sample)
            volts = np.array(
                [voltage_from_resistance(r, circuit) for r in r_out]
            )
            if model.noise_sd > 0:
                volts = volts + noise_rng.normal(0.0, model.noise_sd, volts.shape)
            if quantize_adc:
                volts = np.rint(volts / lsb) * lsb
            volts = np.clip(volts, 0.0, circuit.vcc)
            cells = ",".join(f"{v:.12f}" for v in volts)
            fh.write(f"{t},{cells}\n")

    return len(strain_times), len(imu_times)


def misaligned(model: SensorResponseModel) -> SensorResponseModel:
    """Placement perturbation standing in for a shifted wearing position."""
    gain_scale = (0.80, 1.15, 1.10, 0.85)
    phase_shift = (0.15, -0.10, 0.12, -0.18)
    n = model.n_sensors
    return SensorResponseModel(
        r0=model.r0,
        gf_low=model.gf_low,
        gf_high=model.gf_high,
        knee=model.knee,
        max_strain=model.max_strain,
        noise_sd=model.noise_sd,
        drift_rate=model.drift_rate,
        relaxation_tau=model.relaxation_tau,
        placement_gain=tuple(
            g * gain_scale[i % 4] for i, g in enumerate(model.placement_gain[:n])
        ),
        placement_phase=tuple(
            p + phase_shift[i % 4] for i, p in enumerate(model.placement_phase[:n])
        ),
    )
