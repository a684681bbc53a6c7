"""Goodness-of-fit metrics and per-scenario reports.

The scored quantity is the flexion angle (the middle component of the
angle triple); the other two axes ride along in the plot data
unscored. "Mean error" is the mean absolute error in degrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .alignment import AlignedSample
from .errors import NoEstimatesError, ParseError


def r_squared(truth, est) -> float:
    """Coefficient of determination; 1 is perfect, can go negative."""
    truth = np.asarray(truth, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if truth.shape != est.shape:
        raise ValueError(f"length mismatch: {truth.shape} vs {est.shape}")
    if truth.size < 2:
        raise ValueError("need at least 2 samples")
    mean = truth.mean()
    ss_tot = np.sum((truth - mean) ** 2)
    if ss_tot == 0.0:
        raise ValueError("truth series is constant; variance undefined")
    ss_res = np.sum((truth - est) ** 2)
    return float(1.0 - ss_res / ss_tot)


def mean_error(truth, est) -> float:
    """Mean absolute error."""
    truth = np.asarray(truth, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if truth.shape != est.shape:
        raise ValueError(f"length mismatch: {truth.shape} vs {est.shape}")
    if truth.size < 1:
        raise ValueError("need at least 1 sample")
    return float(np.mean(np.abs(truth - est)))


@dataclass
class EvalReport:
    scenario: str
    r_squared: float
    mean_error_deg: float
    n_samples: int
    residuals: np.ndarray  # (n, 3): estimate - truth per axis


def report(scenario: str, truth: list[AlignedSample], estimates: np.ndarray,
           out_dir: str | Path | None = None) -> EvalReport:
    """Score estimates against aligned ground truth, matched on timestamp.

    estimates: array of rows (t_ms, theta_x, theta_y, theta_z). When
    out_dir is given, writes report.txt plus overlay.csv and
    residuals.csv for plotting.
    """
    estimates = np.asarray(estimates, dtype=np.float64)
    if estimates.size == 0:
        raise NoEstimatesError("no estimates to evaluate")
    if estimates.ndim != 2 or estimates.shape[1] != 4:
        raise ValueError(f"estimates must be (n, 4), got {estimates.shape}")

    by_t = {s.t: s.theta_avg for s in truth}
    rows = [(int(t), xyz, by_t[int(t)])
            for t, *xyz in estimates if int(t) in by_t]
    if not rows:
        raise NoEstimatesError(
            "estimate and ground-truth timestamps do not overlap"
        )
    times = np.array([r[0] for r in rows])
    est = np.array([r[1] for r in rows])
    tru = np.array([r[2] for r in rows])

    rep = EvalReport(
        scenario=scenario,
        r_squared=r_squared(tru[:, 1], est[:, 1]),
        mean_error_deg=mean_error(tru[:, 1], est[:, 1]),
        n_samples=len(rows),
        residuals=est - tru,
    )
    if out_dir is not None:
        _write_report_files(rep, times, tru, est, Path(out_dir))
    return rep


def _write_report_files(rep: EvalReport, times, tru, est, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.txt", "w", encoding="ascii") as fh:
        fh.write(f"scenario = {rep.scenario}\n")
        fh.write(f"r_squared = {rep.r_squared:.12g}\n")
        fh.write(f"mean_error_deg = {rep.mean_error_deg:.12g}\n")
        fh.write(f"n_samples = {rep.n_samples}\n")
    with open(out_dir / "overlay.csv", "w", encoding="ascii") as fh:
        fh.write(
            "t_ms,theta_true_x,theta_true_y,theta_true_z,"
            "theta_est_x,theta_est_y,theta_est_z\n"
        )
        for t, tr, es in zip(times, tru, est):
            fh.write(
                f"{t},{tr[0]:.6f},{tr[1]:.6f},{tr[2]:.6f},"
                f"{es[0]:.6f},{es[1]:.6f},{es[2]:.6f}\n"
            )
    with open(out_dir / "residuals.csv", "w", encoding="ascii") as fh:
        fh.write("t_ms,residual_x,residual_y,residual_z\n")
        for t, r in zip(times, rep.residuals):
            fh.write(f"{t},{r[0]:.6f},{r[1]:.6f},{r[2]:.6f}\n")


def write_estimates_csv(estimates: np.ndarray, path: str | Path) -> None:
    """Write estimate rows as t_ms,theta_x,theta_y,theta_z."""
    with open(path, "w", encoding="ascii") as fh:
        for t, tx, ty, tz in estimates:
            fh.write(f"{int(t)},{tx:.9f},{ty:.9f},{tz:.9f}\n")


def read_estimates_csv(path: str | Path) -> np.ndarray:
    """Read estimate rows; like the IMU grammar but without the range check."""
    rows = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.strip().split(",")
            if len(fields) != 4:
                raise ParseError(
                    f"expected 4 fields, got {len(fields)}", lineno
                )
            try:
                t = int(fields[0])
                vals = [float(tok) for tok in fields[1:]]
            except ValueError:
                raise ParseError(f"bad numeric field in {line.strip()!r}",
                                 lineno) from None
            if not all(np.isfinite(vals)):
                raise ParseError("non-finite estimate", lineno)
            rows.append([t, *vals])
    return np.asarray(rows, dtype=np.float64).reshape(-1, 4)
