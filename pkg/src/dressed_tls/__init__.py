"""Closed-form non-adiabatic dressed states of a damped, driven two-level system."""

from .adiabaticity import AdiabaticityReport, born_fock_condition, evaluate, standard_condition
from .core import (
    AmplitudeSolution,
    DressedStateComponents,
    InstantSnapshot,
    SystemParams,
    adiabatic_half_angle,
    analytic_trajectory,
    dressed_components,
    dressed_frequencies,
    instantaneous_detuning,
    instantaneous_rabi,
    lambdas,
    mixing_amplitudes,
    project_onto_dressed_basis,
    snapshot,
    snapshot_chain,
    solve_constants,
)
from .errors import (
    BranchAmbiguityWarning,
    ConfigError,
    DegenerateCrossingError,
    EnvelopeUnderflowError,
    GridMismatchError,
    StepSizeUnderflowError,
)
from .field import FieldSample, PulseSpec, sample, verify_derivatives
from .oracle import (
    ComparisonReport,
    OracleTrajectory,
    compare,
    integrate_rwa,
    neglected_term_ratio,
    normal_form_residual,
)
from .scenarios import (
    GrischkowskyResult,
    ResultBundle,
    Scenario,
    SweepSpec,
    builtin,
    builtin_names,
    run_grischkowsky,
    run_scenario,
    run_sweep,
    with_override,
)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticityReport",
    "AmplitudeSolution",
    "BranchAmbiguityWarning",
    "ComparisonReport",
    "ConfigError",
    "DegenerateCrossingError",
    "DressedStateComponents",
    "EnvelopeUnderflowError",
    "FieldSample",
    "GridMismatchError",
    "GrischkowskyResult",
    "InstantSnapshot",
    "OracleTrajectory",
    "PulseSpec",
    "ResultBundle",
    "Scenario",
    "StepSizeUnderflowError",
    "SweepSpec",
    "SystemParams",
    "adiabatic_half_angle",
    "analytic_trajectory",
    "born_fock_condition",
    "builtin",
    "builtin_names",
    "compare",
    "dressed_components",
    "dressed_frequencies",
    "evaluate",
    "instantaneous_detuning",
    "instantaneous_rabi",
    "integrate_rwa",
    "lambdas",
    "mixing_amplitudes",
    "neglected_term_ratio",
    "normal_form_residual",
    "project_onto_dressed_basis",
    "run_grischkowsky",
    "run_scenario",
    "run_sweep",
    "sample",
    "snapshot",
    "snapshot_chain",
    "solve_constants",
    "verify_derivatives",
    "with_override",
]
