# SPDX-License-Identifier: Apache-2.0
"""Variational encrypted MPC: plaintext math, surrogates, and the harness."""

from ._core import (
    ConfigError,
    CondensedQp,
    ConstraintSpec,
    LinearConstraints,
    MpcProblem,
    NoiseModel,
    NumericalError,
    PlantModel,
    QpResult,
    RunMode,
    SampleBatch,
    SimConfig,
    StepLog,
    Surrogate,
    TiltedGaussian,
    TrajectoryLog,
    WeightRule,
    auto_domain_bound,
    build_constraints,
    chebyshev_fit,
    closed_loop_run,
    compare_modes,
    condense_cost,
    config_echo,
    estimate,
    load_config,
    max_input_dev,
    max_state_dev,
    mode_name,
    parse_config,
    parse_mode,
    reference_qp_solve,
    rollout_cost,
    sample_tilted,
    surrogate_score,
    threshold_weight,
    tilt,
    violation_score,
)

__all__ = [
    "ConfigError",
    "CondensedQp",
    "ConstraintSpec",
    "LinearConstraints",
    "MpcProblem",
    "NoiseModel",
    "NumericalError",
    "PlantModel",
    "QpResult",
    "RunMode",
    "SampleBatch",
    "SimConfig",
    "StepLog",
    "Surrogate",
    "TiltedGaussian",
    "TrajectoryLog",
    "WeightRule",
    "auto_domain_bound",
    "build_constraints",
    "chebyshev_fit",
    "closed_loop_run",
    "compare_modes",
    "condense_cost",
    "config_echo",
    "estimate",
    "load_config",
    "max_input_dev",
    "max_state_dev",
    "mode_name",
    "parse_config",
    "parse_mode",
    "reference_qp_solve",
    "rollout_cost",
    "sample_tilted",
    "surrogate_score",
    "threshold_weight",
    "tilt",
    "violation_score",
]

__version__ = "0.1.0"
