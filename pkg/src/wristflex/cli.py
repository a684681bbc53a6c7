"""Command-line pipeline: simulate, train, estimate, evaluate.

Each stage reads and writes plain files so the stages compose in shell
scripts; every stage is reproducible from its config/manifest plus the
seed. Exit codes: 0 success, 2 config, 3 parse/ordering, 4 not enough
data, 5 numeric conditioning, 6 model container problems.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import _kernels
from .acquisition import CircuitConfig, read_imu_file, read_strain_file
from .alignment import align_streams, align_truth_to_times, write_aligned_csv
from .configfile import (
    RunConfig,
    Scenario,
    parse_kv_file,
    preset_scenario,
    run_config_from_dict,
    scenario_from_dict,
    scenario_to_text,
)
from .elm import load_model, predict_batch, save_model
from .errors import (
    ConfigError,
    IllConditionedError,
    InsufficientDataError,
    ModelFormatError,
    ModelMismatchError,
    NoEstimatesError,
    OrderingError,
    ParseError,
    SaturationError,
    WristflexError,
)
from .evaluation import read_estimates_csv, report, write_estimates_csv
from .pipeline import run_online
from .simulator import emit_streams

EXIT_CODES = [
    (ConfigError, 2),
    (ParseError, 3),
    (OrderingError, 3),
    (SaturationError, 3),
    (InsufficientDataError, 4),
    (NoEstimatesError, 4),
    (IllConditionedError, 5),
    (ModelMismatchError, 6),
    (ModelFormatError, 6),
]


def _exit_code(exc: WristflexError) -> int:
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


def cmd_simulate(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise ConfigError("give exactly one of --config or --preset")
    if args.config is not None:
        raw = parse_kv_file(args.config)
        if args.seed is not None:
            raw["seed"] = str(args.seed)
        scenario = scenario_from_dict(raw)
    else:
        scenario = preset_scenario(args.preset, args.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    strain_path = out / "strain.csv"
    imu_path = out / "imu.csv"
    n_strain, n_imu = emit_streams(
        scenario.trajectory,
        scenario.sensor,
        scenario.timing,
        scenario.circuit,
        strain_path,
        imu_path,
        quantize_adc=scenario.quantize_adc,
    )
    (out / "manifest.txt").write_text(scenario_to_text(scenario), encoding="ascii")
    print(f"scenario {scenario.label}: {n_strain} strain frames -> {strain_path}")
    print(f"scenario {scenario.label}: {n_imu} imu frames -> {imu_path}")
    return 0


def _load_run_config(args) -> RunConfig:
    if args.config is not None:
        cfg = run_config_from_dict(parse_kv_file(args.config))
    else:
        cfg = RunConfig()
    if args.seed is not None:
        cfg = RunConfig(
            online=replace(cfg.online, seed=args.seed), circuit=cfg.circuit
        )
    return cfg


def cmd_train(args) -> int:
    cfg = _load_run_config(args)
    strain = read_strain_file(args.strain, cfg.circuit)
    imu = read_imu_file(args.imu)
    samples = align_streams(strain, imu)
    result = run_online(samples, cfg.online)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.bin").write_bytes(save_model(result.model))
    write_estimates_csv(result.estimates, out / "estimates.csv")
    if args.dump_aligned:
        write_aligned_csv(samples, out / "aligned.csv")

    trace = ""
    evals = -1
    if result.pso is not None:
        trace = ",".join(f"{v:.12g}" for v in result.pso.gbest_trace)
        evals = result.pso.n_evaluations
    est_start = int(result.estimates[0, 0]) if len(result.estimates) else -1
    log = [
        f"chosen_n = {result.chosen_n}",
        f"pso_evaluations = {evals}",
        f"pso_trace = {trace}",
        f"n_calib = {result.n_calib}",
        f"n_train = {result.n_train}",
        f"init_block = {result.init_block}",
        f"chunks_seen = {result.state.chunks_seen}",
        f"samples_seen = {result.state.samples_seen}",
        f"cutoff_ms = {result.cutoff_ms}",
        f"estimation_start_ms = {est_start}",
        f"backend = {_kernels.BACKEND}",
    ]
    (out / "training_log.txt").write_text("\n".join(log) + "\n", encoding="ascii")
    print(
        f"trained n={result.chosen_n} on {result.n_train} samples "
        f"({result.state.chunks_seen} chunks); model -> {out / 'model.bin'}"
    )
    return 0


def _sensor_count_in_file(path) -> int | None:
    with open(path, encoding="ascii") as fh:
        for line in fh:
            if line.strip():
                return line.count(",")
    return None


def cmd_estimate(args) -> int:
    model = load_model(Path(args.model).read_bytes())
    cfg = _load_run_config(args)
    # parse with the file's own width so a width mismatch is reported
    # against the model, not as a malformed line
    m_in_file = _sensor_count_in_file(args.strain)
    if m_in_file is not None and m_in_file != model.hidden.n_inputs:
        raise ModelMismatchError(
            f"strain frames carry {m_in_file} sensors, model expects "
            f"{model.hidden.n_inputs}"
        )
    circuit = replace(cfg.circuit, m_sensors=model.hidden.n_inputs)
    strain = read_strain_file(args.strain, circuit)
    frames = [f for f in strain if args.start_ms is None or f.t >= args.start_ms]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if frames:
        x = np.asarray([f.voltages for f in frames])
        preds = predict_batch(model, x)
        times = np.array([f.t for f in frames], dtype=np.float64)
        estimates = np.column_stack([times, preds])
    else:
        estimates = np.empty((0, 4))
    write_estimates_csv(estimates, out / "estimates.csv")
    print(f"{len(frames)} estimates -> {out / 'estimates.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    estimates = read_estimates_csv(args.estimates)
    if estimates.size == 0:
        raise NoEstimatesError(f"no estimate rows in {args.estimates}")
    imu = read_imu_file(args.imu)
    truth = align_truth_to_times([int(t) for t in estimates[:, 0]], imu)
    rep = report(args.scenario, truth, estimates, out_dir=args.out)
    print(
        f"scenario {rep.scenario}: r_squared = {rep.r_squared:.4f}, "
        f"mean_error_deg = {rep.mean_error_deg:.2f}, n = {rep.n_samples}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wristflex",
        description="Wrist-angle estimation pipeline over replay files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate replay streams for a scenario")
    p.add_argument("--config", help="scenario config / manifest file")
    p.add_argument("--preset", help="built-in scenario: nominal, clean, misaligned")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="align streams and train the model online")
    p.add_argument("strain", help="strain replay file")
    p.add_argument("imu", help="IMU replay file")
    p.add_argument("--config", help="run config file")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dump-aligned", action="store_true",
                   help="also write the aligned samples as CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("estimate", help="estimate angles from strain data alone")
    p.add_argument("strain", help="strain replay file")
    p.add_argument("model", help="trained model file")
    p.add_argument("--config", help="run config file (circuit section)")
    p.add_argument("--seed", type=int, help=argparse.SUPPRESS)
    p.add_argument("--start-ms", type=int, default=None,
                   help="only estimate frames at or after this timestamp")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", help="score estimates against IMU ground truth")
    p.add_argument("estimates", help="estimates CSV")
    p.add_argument("imu", help="IMU replay file")
    p.add_argument("--scenario", default="unlabeled", help="label for the report")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WristflexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
