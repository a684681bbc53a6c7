"""Online wrist-joint-angle estimation from a strain-sensing wristband.

Two-stage pipeline: a node-count search plus online-sequential training
of a random-feature network while IMU ground truth is available, then
strain-only angle estimation with the frozen model. A physics-informed
simulator stands in for the hardware.
"""

from .acquisition import (
    CircuitConfig,
    ImuFrame,
    StrainFrame,
    parse_imu_line,
    parse_strain_line,
    resistance_from_voltage,
    voltage_from_resistance,
)
from .alignment import AlignedSample, AlignQueue, align_streams
from .elm import (
    ElmModel,
    HiddenParams,
    OutputWeights,
    batch_fit,
    hidden_matrix,
    init_hidden_params,
    load_model,
    predict,
    predict_batch,
    save_model,
)
from .evaluation import EvalReport, mean_error, r_squared, report
from .oselm import OselmState, oselm_init, oselm_update, run_updates
from .pipeline import OnlineConfig, RunResult, run_online
from .pso import PsoConfig, PsoResult, fitness_node_count, pso_search
from .simulator import (
    SensorResponseModel,
    StreamTiming,
    Trajectory,
    TrajectoryConfig,
    emit_streams,
    gen_trajectory,
    resistance_from_strain,
    strain_from_angle,
)

__version__ = "0.1.0"

__all__ = [
    "AlignQueue",
    "AlignedSample",
    "CircuitConfig",
    "ElmModel",
    "EvalReport",
    "HiddenParams",
    "ImuFrame",
    "OnlineConfig",
    "OselmState",
    "OutputWeights",
    "PsoConfig",
    "PsoResult",
    "RunResult",
    "SensorResponseModel",
    "StrainFrame",
    "StreamTiming",
    "Trajectory",
    "TrajectoryConfig",
    "align_streams",
    "batch_fit",
    "emit_streams",
    "fitness_node_count",
    "gen_trajectory",
    "hidden_matrix",
    "init_hidden_params",
    "load_model",
    "mean_error",
    "oselm_init",
    "oselm_update",
    "parse_imu_line",
    "parse_strain_line",
    "predict",
    "predict_batch",
    "pso_search",
    "r_squared",
    "report",
    "resistance_from_strain",
    "resistance_from_voltage",
    "run_online",
    "run_updates",
    "save_model",
    "strain_from_angle",
    "voltage_from_resistance",
]
