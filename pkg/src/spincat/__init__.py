"""Weak values of a two-particle spin-exchange setup: exact tables from
pre/post-selected states, slope-fit extraction under imaginary-time
absorption, and a seeded Monte-Carlo delayed-choice simulator."""

from .delayed import (
    BranchStats,
    SwitchPolicy,
    TrialBatchConfig,
    branch_sweep,
    default_selections,
    pooled_estimate,
    run_batch,
    trial_probability,
)
from .errors import (
    DegenerateFit,
    DomainError,
    GridMismatch,
    NonHermitianInput,
    OrthogonalSelection,
    ProbabilityOverflow,
    SpincatError,
)
from .experiments import (
    DelayedSuite,
    ExperimentReport,
    ReportRow,
    analytic_weak_value,
    delayed_suite,
    exp_analytic_tables,
    exp_delayed_sweeps,
    exp_deterministic_sweeps,
    exp_rate_surfaces,
    sweep_set,
)
from .hilbert import (
    DIM,
    BasisIndex,
    Operator,
    SpectralDecomposition,
    StateVector,
    apply,
    identity,
    inner,
    matexp_neg,
    spectral,
    tensor4,
)
from .ite import (
    DEFAULT_GRID,
    OLSFit,
    SurfaceResult,
    SweepResult,
    TimeGrid,
    coincidence_rate,
    fit_ols,
    surface,
    sweep,
    t_of_transmissivity,
    transmissivity,
)
from .observables import (
    CANONICAL_LABELS,
    canonical_observables,
    path_projector,
    path_spin,
    spin_z,
)
from .tsvf import (
    EPS_OVERLAP,
    Selection,
    WeakValue,
    post_exchange,
    post_identity,
    post_state,
    preselect,
    weak_value,
    weak_value_table,
)

__all__ = [
    "BasisIndex", "BranchStats", "CANONICAL_LABELS", "DEFAULT_GRID", "DIM",
    "DegenerateFit", "DelayedSuite", "DomainError", "EPS_OVERLAP",
    "ExperimentReport", "GridMismatch", "NonHermitianInput", "OLSFit",
    "Operator", "OrthogonalSelection", "ProbabilityOverflow", "ReportRow",
    "Selection", "SpectralDecomposition", "SpincatError", "StateVector",
    "SurfaceResult", "SweepResult", "SwitchPolicy", "TimeGrid",
    "TrialBatchConfig", "WeakValue", "analytic_weak_value", "apply",
    "branch_sweep", "canonical_observables", "coincidence_rate",
    "default_selections", "delayed_suite", "exp_analytic_tables",
    "exp_delayed_sweeps", "exp_deterministic_sweeps", "exp_rate_surfaces",
    "fit_ols", "identity", "inner", "matexp_neg", "path_projector",
    "path_spin", "pooled_estimate", "post_exchange", "post_identity",
    "post_state", "preselect", "run_batch", "spectral", "spin_z", "surface",
    "sweep", "sweep_set", "t_of_transmissivity", "tensor4",
    "transmissivity", "trial_probability", "weak_value", "weak_value_table",
]
