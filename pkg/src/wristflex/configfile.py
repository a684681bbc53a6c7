"""Plain-text key=value configuration files, presets, and manifests.

Grammar (see README): one `key = value` per line, `#` starts a comment,
blank lines ignored. Keys are dotted (section.name). Unknown keys are
rejected by name; a manifest is simply a config file with every key
written out, so any manifest reloads into an identical run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .acquisition import CircuitConfig
from .errors import ConfigError
from .pipeline import OnlineConfig
from .pso import PsoConfig
from .simulator import SensorResponseModel, StreamTiming, TrajectoryConfig, misaligned


def parse_kv_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_kv_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    return parse_kv_text(path.read_text(encoding="ascii"), str(path))


def _to_bool(value: str, key: str) -> bool:
    v = value.lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {value!r}")


def _to_int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected an integer, got {value!r}") from None


def _to_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected a number, got {value!r}") from None


def _to_floats(value: str, key: str) -> tuple[float, ...]:
    return tuple(_to_float(tok.strip(), key) for tok in value.split(","))


@dataclass
class Scenario:
    """Everything cmd_simulate needs: label + all generator configs."""

    label: str = "nominal"
    seed: int = 42
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    sensor: SensorResponseModel = field(default_factory=SensorResponseModel)
    timing: StreamTiming = field(default_factory=StreamTiming)
    circuit: CircuitConfig = field(default_factory=CircuitConfig)
    quantize_adc: bool = False


@dataclass
class RunConfig:
    """Everything cmd_train needs: online-training knobs + circuit."""

    online: OnlineConfig = field(default_factory=OnlineConfig)
    circuit: CircuitConfig = field(default_factory=CircuitConfig)


_SCENARIO_FIELDS = {
    "scenario": ("label", str),
    "seed": ("seed", _to_int),
    "quantize_adc": ("quantize_adc", _to_bool),
    "trajectory.duration_s": ("duration_s", _to_float),
    "trajectory.cycle_period_s": ("cycle_period_s", _to_float),
    "trajectory.flexion_peak_deg": ("flexion_peak_deg", _to_float),
    "trajectory.extension_peak_deg": ("extension_peak_deg", _to_float),
    "trajectory.calibration_span_s": ("calibration_span_s", _to_float),
    "sensor.r0_ohm": ("r0", _to_float),
    "sensor.gf_low": ("gf_low", _to_float),
    "sensor.gf_high": ("gf_high", _to_float),
    "sensor.knee_strain": ("knee", _to_float),
    "sensor.max_strain": ("max_strain", _to_float),
    "sensor.noise_sd_v": ("noise_sd", _to_float),
    "sensor.drift_rate_per_s": ("drift_rate", _to_float),
    "sensor.relaxation_tau_s": ("relaxation_tau", _to_float),
    "sensor.placement_gain": ("placement_gain", _to_floats),
    "sensor.placement_phase": ("placement_phase", _to_floats),
    "timing.strain_frame_period_ms": ("strain_frame_period_ms", _to_int),
    "timing.imu_period_ms": ("imu_period_ms", _to_int),
    "circuit.vcc": ("vcc", _to_float),
    "circuit.r_f": ("r_f", _to_float),
    "circuit.adc_max_count": ("adc_max_count", _to_int),
    "circuit.m_sensors": ("m_sensors", _to_int),
}

_RUN_FIELDS = {
    "run.calibration_span_s": ("calibration_span_s", _to_float),
    "run.training_fraction": ("training_fraction", _to_float),
    "run.chunk_size": ("chunk_size", _to_int),
    "run.activation": ("activation", str),
    "run.ridge": ("ridge", _to_float),
    "run.seed": ("seed", _to_int),
    "pso.swarm_size": ("swarm_size", _to_int),
    "pso.iterations": ("iterations", _to_int),
    "pso.inertia": ("inertia", _to_float),
    "pso.cognitive": ("cognitive", _to_float),
    "pso.social": ("social", _to_float),
    "pso.n_min": ("n_min", _to_int),
    "pso.n_max": ("n_max", _to_int),
    "circuit.vcc": ("vcc", _to_float),
    "circuit.r_f": ("r_f", _to_float),
    "circuit.adc_max_count": ("adc_max_count", _to_int),
    "circuit.m_sensors": ("m_sensors", _to_int),
}


def _split_sections(raw: dict[str, str], fields: dict, what: str):
    sections: dict[str, dict] = {}
    for key, value in raw.items():
        if key not in fields:
            raise ConfigError(f"unknown {what} key {key!r}")
        attr, conv = fields[key]
        section = key.split(".", 1)[0] if "." in key else ""
        sections.setdefault(section, {})[attr] = (
            value if conv is str else conv(value, key)
        )
    return sections


def scenario_from_dict(raw: dict[str, str]) -> Scenario:
    sections = _split_sections(raw, _SCENARIO_FIELDS, "scenario")
    top = sections.get("", {})
    seed = top.get("seed", Scenario.seed)
    traj_kwargs = sections.get("trajectory", {})
    traj_kwargs["seed"] = seed
    try:
        return Scenario(
            label=top.get("label", "nominal"),
            seed=seed,
            quantize_adc=top.get("quantize_adc", False),
            trajectory=TrajectoryConfig(**traj_kwargs),
            sensor=SensorResponseModel(**sections.get("sensor", {})),
            timing=StreamTiming(**sections.get("timing", {})),
            circuit=CircuitConfig(**sections.get("circuit", {})),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def run_config_from_dict(raw: dict[str, str]) -> RunConfig:
    sections = _split_sections(raw, _RUN_FIELDS, "run")
    pso_kwargs = sections.get("pso", {})
    n_min = pso_kwargs.pop("n_min", None)
    n_max = pso_kwargs.pop("n_max", None)
    if (n_min is None) != (n_max is None):
        raise ConfigError("pso.n_min and pso.n_max must be given together")
    if n_min is not None:
        pso_kwargs["bounds"] = (n_min, n_max)
    try:
        return RunConfig(
            online=OnlineConfig(
                pso=PsoConfig(**pso_kwargs), **sections.get("run", {})
            ),
            circuit=CircuitConfig(**sections.get("circuit", {})),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def scenario_to_text(s: Scenario) -> str:
    """Fully resolved manifest; feeding it back reproduces the run."""
    gains = ",".join(f"{g:.12g}" for g in s.sensor.placement_gain)
    phases = ",".join(f"{p:.12g}" for p in s.sensor.placement_phase)
    lines = [
        f"scenario = {s.label}",
        f"seed = {s.seed}",
        f"quantize_adc = {'true' if s.quantize_adc else 'false'}",
        f"trajectory.duration_s = {s.trajectory.duration_s:.12g}",
        f"trajectory.cycle_period_s = {s.trajectory.cycle_period_s:.12g}",
        f"trajectory.flexion_peak_deg = {s.trajectory.flexion_peak_deg:.12g}",
        f"trajectory.extension_peak_deg = {s.trajectory.extension_peak_deg:.12g}",
        f"trajectory.calibration_span_s = {s.trajectory.calibration_span_s:.12g}",
        f"sensor.r0_ohm = {s.sensor.r0:.12g}",
        f"sensor.gf_low = {s.sensor.gf_low:.12g}",
        f"sensor.gf_high = {s.sensor.gf_high:.12g}",
        f"sensor.knee_strain = {s.sensor.knee:.12g}",
        f"sensor.max_strain = {s.sensor.max_strain:.12g}",
        f"sensor.noise_sd_v = {s.sensor.noise_sd:.12g}",
        f"sensor.drift_rate_per_s = {s.sensor.drift_rate:.12g}",
        f"sensor.relaxation_tau_s = {s.sensor.relaxation_tau:.12g}",
        f"sensor.placement_gain = {gains}",
        f"sensor.placement_phase = {phases}",
        f"timing.strain_frame_period_ms = {s.timing.strain_frame_period_ms}",
        f"timing.imu_period_ms = {s.timing.imu_period_ms}",
        f"circuit.vcc = {s.circuit.vcc:.12g}",
        f"circuit.r_f = {s.circuit.r_f:.12g}",
        f"circuit.adc_max_count = {s.circuit.adc_max_count}",
        f"circuit.m_sensors = {s.circuit.m_sensors}",
    ]
    return "\n".join(lines) + "\n"


def preset_scenario(name: str, seed: int | None = None) -> Scenario:
    """Built-in scenarios: nominal, clean, misaligned."""
    base_seed = 42 if seed is None else seed
    if name == "nominal":
        s = Scenario(label="nominal", seed=base_seed)
    elif name == "clean":
        s = Scenario(
            label="clean",
            seed=base_seed,
            sensor=SensorResponseModel(noise_sd=0.0, drift_rate=0.0,
                                       relaxation_tau=0.0),
        )
    elif name == "misaligned":
        s = Scenario(
            label="misaligned",
            seed=base_seed,
            sensor=misaligned(SensorResponseModel()),
        )
    else:
        raise ConfigError(
            f"unknown preset {name!r}; choose nominal, clean or misaligned"
        )
    s.trajectory = TrajectoryConfig(seed=base_seed)
    return s
