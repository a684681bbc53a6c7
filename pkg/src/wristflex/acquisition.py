"""Readout-circuit model and replay-stream parsing.

The wristband electronics put each strain sensor in series with a
reference resistor, so the measured voltage follows

    V = VCC * R_s / (R_s + R_f)

Live serial ports are replaced by line-oriented CSV replay files with
the same payload semantics (see README for the exact grammar):

    strain:  t_ms,v1,v2,...,vm      (volts)
    IMU:     t_ms,theta_x,theta_y,theta_z   (degrees)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, SaturationError


@dataclass(frozen=True)
class CircuitConfig:
    """Voltage-divider constants of the readout circuit."""

    vcc: float = 3.3
    r_f: float = 50_000.0
    adc_max_count: int = 1023
    m_sensors: int = 4

    def __post_init__(self):
        if self.vcc <= 0:
            raise ValueError(f"vcc must be positive, got {self.vcc}")
        if self.r_f <= 0:
            raise ValueError(f"r_f must be positive, got {self.r_f}")
        if self.m_sensors < 1:
            raise ValueError("m_sensors must be >= 1")


@dataclass(frozen=True)
class StrainFrame:
    """One complete sweep over the m strain sensors."""

    t: int  # milliseconds since stream start
    voltages: np.ndarray  # shape (m,), volts


@dataclass(frozen=True)
class ImuFrame:
    """One orientation reading (theta_x, theta_y, theta_z)."""

    t: int  # milliseconds since stream start
    theta: np.ndarray  # shape (3,), degrees


def voltage_from_resistance(r_s: float, cfg: CircuitConfig) -> float:
    """Divided voltage seen by the ADC for sensor resistance r_s."""
    if r_s < 0:
        raise ValueError(f"sensor resistance must be >= 0, got {r_s}")
    return cfg.vcc * r_s / (r_s + cfg.r_f)


def resistance_from_voltage(v_adc: float, cfg: CircuitConfig) -> float:
    """Invert the divider: sensor resistance from the ADC voltage.

    Raises SaturationError for v_adc >= vcc (the divider cannot reach
    the rail with finite resistance).
    """
    if v_adc < 0:
        raise ValueError(f"ADC voltage must be >= 0, got {v_adc}")
    if v_adc >= cfg.vcc:
        raise SaturationError(
            f"ADC voltage {v_adc} V at or above supply {cfg.vcc} V; "
            "divider saturated"
        )
    return cfg.r_f * v_adc / (cfg.vcc - v_adc)


def _parse_timestamp(token: str, lineno: int | None) -> int:
    try:
        t = int(token)
    except ValueError:
        raise ParseError(f"timestamp {token!r} is not an integer", lineno) from None
    if t < 0:
        raise ParseError(f"timestamp {t} is negative", lineno)
    return t


def _parse_float(token: str, what: str, lineno: int | None) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{what} {token!r} is not a number", lineno) from None


def parse_strain_line(line: str, cfg: CircuitConfig,
                      lineno: int | None = None) -> StrainFrame:
    """Parse one strain replay line: t_ms followed by m voltages."""
    fields = line.strip().split(",")
    expected = 1 + cfg.m_sensors
    if len(fields) != expected:
        raise ParseError(
            f"expected {expected} fields (t_ms + {cfg.m_sensors} voltages), "
            f"got {len(fields)}",
            lineno,
        )
    t = _parse_timestamp(fields[0], lineno)
    volts = np.array(
        [_parse_float(tok, "voltage", lineno) for tok in fields[1:]],
        dtype=np.float64,
    )
    if not np.all(np.isfinite(volts)):
        raise ParseError("non-finite voltage", lineno)
    if np.any(volts < 0) or np.any(volts > cfg.vcc):
        raise ParseError(
            f"voltage outside [0, {cfg.vcc}]: {volts.tolist()}", lineno
        )
    return StrainFrame(t=t, voltages=volts)


def parse_imu_line(line: str, lineno: int | None = None) -> ImuFrame:
    """Parse one IMU replay line: t_ms,theta_x,theta_y,theta_z."""
    fields = line.strip().split(",")
    if len(fields) != 4:
        raise ParseError(
            f"expected 4 fields (t_ms + 3 angles), got {len(fields)}", lineno
        )
    t = _parse_timestamp(fields[0], lineno)
    theta = np.array(
        [_parse_float(tok, "angle", lineno) for tok in fields[1:]],
        dtype=np.float64,
    )
    if not np.all(np.isfinite(theta)):
        raise ParseError("non-finite angle", lineno)
    if np.any(np.abs(theta) > 180.0):
        raise ParseError(f"angle outside [-180, 180]: {theta.tolist()}", lineno)
    return ImuFrame(t=t, theta=theta)


def read_strain_file(path: str | Path, cfg: CircuitConfig) -> list[StrainFrame]:
    """Read a whole strain replay file, skipping blank lines."""
    frames = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            frames.append(parse_strain_line(line, cfg, lineno))
    return frames


def read_imu_file(path: str | Path) -> list[ImuFrame]:
    """Read a whole IMU replay file, skipping blank lines."""
    frames = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            frames.append(parse_imu_line(line, lineno))
    return frames
