"""Dual-rate stream alignment.

The IMU reports orientation several times faster than the wristband
completes a sensor sweep, so strain frames define the time base: a
strain frame at t_i owns every IMU frame with t_i <= t < t_{i+1}
(half-open on the right, so no IMU frame is counted twice), and the
owned angles are averaged into a single training sample. An interval
is closed -- and its sample becomes available to drain() -- once the
next strain frame arrives; flush() closes the last open interval at
end of stream.

Starved intervals (no IMU frame at all) reuse the previous average and
are flagged imputed; a starved first interval is dropped since there is
nothing to carry.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acquisition import ImuFrame, StrainFrame
from .errors import OrderingError


@dataclass(frozen=True)
class AlignedSample:
    """One strain frame paired with the mean IMU angles of its interval."""

    t: int  # the strain frame's timestamp, ms
    voltages: np.ndarray  # shape (m,), volts
    theta_avg: np.ndarray  # shape (3,), degrees
    imputed: bool = False  # True when theta_avg was carried from the previous interval


class AlignQueue:
    """Buffers the two streams and emits AlignedSamples in strain-time order.

    push_strain/push_imu may be called from two producer threads and
    only append (with per-stream ordering checks); intervals are
    resolved lazily when the single consumer calls drain or flush, so
    push interleaving across the two streams never affects which IMU
    frame lands in which interval. All state is guarded by one lock.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._strain: list[StrainFrame] = []
        self._imu: list[ImuFrame] = []
        self._last_strain_t: int | None = None
        self._last_imu_t: int | None = None
        self._prev_theta: np.ndarray | None = None
        self._flushed = False

    def push_strain(self, frame: StrainFrame) -> None:
        with self._lock:
            if self._flushed:
                raise OrderingError("queue already flushed")
            if self._last_strain_t is not None and frame.t <= self._last_strain_t:
                raise OrderingError(
                    f"strain timestamp {frame.t} not after previous "
                    f"{self._last_strain_t}"
                )
            self._last_strain_t = frame.t
            self._strain.append(frame)

    def push_imu(self, frame: ImuFrame) -> None:
        with self._lock:
            if self._flushed:
                raise OrderingError("queue already flushed")
            if self._last_imu_t is not None and frame.t < self._last_imu_t:
                raise OrderingError(
                    f"IMU timestamp {frame.t} before previous {self._last_imu_t}"
                )
            self._last_imu_t = frame.t
            self._imu.append(frame)

    def _resolve(self, owner: StrainFrame, end_t: int | None) -> AlignedSample | None:
        # Consume IMU frames in [owner.t, end_t); end_t None means "all".
        window = []
        while self._imu and (end_t is None or self._imu[0].t < end_t):
            f = self._imu.pop(0)
            if f.t >= owner.t:
                window.append(f.theta)
            # frames before the very first strain frame have no interval
        if window:
            theta = np.mean(np.asarray(window), axis=0)
            self._prev_theta = theta
            return AlignedSample(t=owner.t, voltages=owner.voltages, theta_avg=theta)
        if self._prev_theta is not None:
            return AlignedSample(
                t=owner.t,
                voltages=owner.voltages,
                theta_avg=self._prev_theta,
                imputed=True,
            )
        return None  # starved first interval: dropped

    def drain(self) -> list[AlignedSample]:
        """Resolve and return every sample whose interval is closed.

        A strain frame's interval is closed once the next strain frame
        has been pushed; the newest frame stays open until flush.
        """
        with self._lock:
            out = []
            while len(self._strain) >= 2:
                owner = self._strain.pop(0)
                sample = self._resolve(owner, self._strain[0].t)
                if sample is not None:
                    out.append(sample)
            return out

    def flush(self) -> list[AlignedSample]:
        """Close the final open interval and return any remaining samples."""
        with self._lock:
            out = []
            while len(self._strain) >= 2:
                owner = self._strain.pop(0)
                sample = self._resolve(owner, self._strain[0].t)
                if sample is not None:
                    out.append(sample)
            if not self._flushed:
                self._flushed = True
                if self._strain:
                    owner = self._strain.pop(0)
                    sample = self._resolve(owner, None)
                    if sample is not None:
                        out.append(sample)
            return out


def align_streams(strain: list[StrainFrame],
                  imu: list[ImuFrame]) -> list[AlignedSample]:
    """Align two complete replay streams (push everything, drain, flush)."""
    q = AlignQueue()
    for f in strain:
        q.push_strain(f)
    for f in imu:
        q.push_imu(f)
    out = q.drain()
    out.extend(q.flush())
    return out


def align_truth_to_times(times_ms: list[int],
                         imu: list[ImuFrame]) -> list[AlignedSample]:
    """Average IMU angles onto an arbitrary ascending time base.

    Used at evaluation time, where estimate timestamps play the role of
    strain frames. Samples carry zero voltages.
    """
    dummy = np.zeros(1)
    strain = [StrainFrame(t=t, voltages=dummy) for t in times_ms]
    return align_streams(strain, imu)


def write_aligned_csv(samples: list[AlignedSample], path: str | Path) -> None:
    """Dump aligned samples: t_ms,v1..vm,theta_x,theta_y,theta_z,imputed."""
    with open(path, "w", encoding="ascii") as fh:
        for s in samples:
            volts = ",".join(f"{v:.12f}" for v in s.voltages)
            theta = ",".join(f"{a:.6f}" for a in s.theta_avg)
            fh.write(f"{s.t},{volts},{theta},{int(s.imputed)}\n")
