"""Aging-aware mapping of clustered SNN workloads onto tiled crossbar hardware.

The package models per-tile circuit wear (TDDB, NBTI, optional HCI) driven by
spike-train voltage stress, a surrogate execution-time model over a 2D mesh,
and a constrained binary particle swarm that minimizes the product of the two,
with Pareto-front extraction and an exhaustive oracle for verification.
"""

from .aging import (
    AgingParams,
    AgingReport,
    BOLTZMANN_EV,
    CalibrationError,
    HciParams,
    NbtiParams,
    NeuronAging,
    TddbParams,
    alpha,
    calibrate_baseline,
    combine_aging,
    evaluate_hardware_aging,
    hci_aging,
    hosted_set_mechanism_agings,
    mttf_from_aging,
    nbti_aging,
    reliability_at,
    tddb_aging,
)
from .config import ConfigError, RunConfig, YEAR_SECONDS, load_run_config, parse_run_config
from .model import (
    Cluster,
    ClusteredSnn,
    DeviceProfile,
    DIODE_1D1R,
    Edge,
    HardwareConfig,
    Mapping,
    MappingConstraintError,
    SpikeTrain,
    TRANSISTOR_1T1R,
    Violation,
    VoltageTrace,
    Workload,
    WorkloadShape,
    build_voltage_trace,
    concat_traces,
    first_fit_mapping,
    generate_poisson_workload,
    mapping_violations,
    require_valid_mapping,
    validate_snn,
)
from .oracle import (
    BruteForceOptimum,
    ENUMERATION_GUARD,
    GuardExceededError,
    brute_force_optimum,
    brute_force_pareto,
    count_feasible_mappings,
    enumerate_mappings,
)
from .perf import PerfParams, execution_time
from .swarm import (
    ArchiveEntry,
    EvalContext,
    Evaluation,
    FrontPoint,
    InfeasibleError,
    OptimizeResult,
    ParetoFront,
    PsoConfig,
    SwarmState,
    binarize,
    extract_pareto,
    fitness,
    initialize_swarm,
    optimize,
    repair,
    select_final,
    step_swarm,
)

__version__ = "0.1.0"

__all__ = [
    "AgingParams",
    "AgingReport",
    "ArchiveEntry",
    "BOLTZMANN_EV",
    "BruteForceOptimum",
    "CalibrationError",
    "Cluster",
    "ClusteredSnn",
    "ConfigError",
    "DIODE_1D1R",
    "DeviceProfile",
    "ENUMERATION_GUARD",
    "Edge",
    "EvalContext",
    "Evaluation",
    "FrontPoint",
    "GuardExceededError",
    "HardwareConfig",
    "HciParams",
    "InfeasibleError",
    "Mapping",
    "MappingConstraintError",
    "NbtiParams",
    "NeuronAging",
    "OptimizeResult",
    "ParetoFront",
    "PerfParams",
    "PsoConfig",
    "RunConfig",
    "SpikeTrain",
    "SwarmState",
    "TRANSISTOR_1T1R",
    "TddbParams",
    "Violation",
    "VoltageTrace",
    "Workload",
    "WorkloadShape",
    "YEAR_SECONDS",
    "alpha",
    "binarize",
    "brute_force_optimum",
    "brute_force_pareto",
    "build_voltage_trace",
    "calibrate_baseline",
    "combine_aging",
    "concat_traces",
    "count_feasible_mappings",
    "enumerate_mappings",
    "evaluate_hardware_aging",
    "execution_time",
    "extract_pareto",
    "first_fit_mapping",
    "fitness",
    "generate_poisson_workload",
    "hci_aging",
    "hosted_set_mechanism_agings",
    "initialize_swarm",
    "load_run_config",
    "mapping_violations",
    "mttf_from_aging",
    "nbti_aging",
    "optimize",
    "parse_run_config",
    "reliability_at",
    "repair",
    "require_valid_mapping",
    "select_final",
    "step_swarm",
    "tddb_aging",
    "validate_snn",
]
