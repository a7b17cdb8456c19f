"""Correntropy-weighted Kalman filtering in conventional and square-root forms.

The package provides three algebraically equivalent implementations of the
weighted filter (full-covariance Joseph form plus two Cholesky square-root
array forms), a dense reference Kalman filter, a seeded trajectory simulator
with impulsive outlier injection, and a Monte Carlo harness that measures
estimation accuracy and numerical breakdown under ill-conditioning.
"""

__version__ = "0.1.0"

from .bench import (
    BLOWUP_FACTOR,
    RadarConstants,
    RmseReport,
    Scenario,
    SweepEntry,
    SweepReport,
    build_example1,
    build_example2,
    ill_conditioned_scenario,
    radar_scenario,
    run_conditioning_sweep,
    run_monte_carlo,
    write_csv,
)
from .correntropy import (
    DegenerateWeight,
    KernelSpec,
    LambdaInputs,
    compute_lambda,
    gaussian_kernel,
    weighted_norm,
)
from .filters import (
    ALGORITHMS,
    DIVERGENCE_LIMIT,
    Diverged,
    FilterRun,
    FilterState,
    RunStatus,
    StepReport,
    gain_information_form,
    gain_innovation_form,
    kf_reference_step,
    mcckf_measurement_update,
    mcckf_time_update,
    run_filter,
    sr1a_measurement_update,
    sr1b_measurement_update,
    sr_time_update,
)
from .linalg import (
    NonFiniteInput,
    NotPositiveDefinite,
    NotSymmetric,
    SingularFactor,
    cholesky_lower,
    condition_estimate,
    lower_triangularize,
    symmetrize,
    triangular_inverse,
    triangular_solve,
)
from .model import (
    InitialCondition,
    Measurement,
    StateSpaceModel,
    TimeVaryingModel,
    validate_model,
)
from .sim import (
    SeedSpec,
    ShotNoiseSpec,
    Trajectory,
    draw_gaussian,
    psd_factor,
    simulate,
    write_trajectory_csv,
)

__all__ = [
    "__version__",
    "ALGORITHMS",
    "BLOWUP_FACTOR",
    "DIVERGENCE_LIMIT",
    "DegenerateWeight",
    "Diverged",
    "FilterRun",
    "FilterState",
    "InitialCondition",
    "KernelSpec",
    "LambdaInputs",
    "Measurement",
    "NonFiniteInput",
    "NotPositiveDefinite",
    "NotSymmetric",
    "RadarConstants",
    "RmseReport",
    "RunStatus",
    "Scenario",
    "SeedSpec",
    "ShotNoiseSpec",
    "SingularFactor",
    "StateSpaceModel",
    "StepReport",
    "SweepEntry",
    "SweepReport",
    "TimeVaryingModel",
    "Trajectory",
    "build_example1",
    "build_example2",
    "cholesky_lower",
    "compute_lambda",
    "condition_estimate",
    "draw_gaussian",
    "gain_information_form",
    "gain_innovation_form",
    "gaussian_kernel",
    "ill_conditioned_scenario",
    "kf_reference_step",
    "lower_triangularize",
    "mcckf_measurement_update",
    "mcckf_time_update",
    "psd_factor",
    "radar_scenario",
    "run_conditioning_sweep",
    "run_filter",
    "run_monte_carlo",
    "simulate",
    "sr1a_measurement_update",
    "sr1b_measurement_update",
    "sr_time_update",
    "symmetrize",
    "triangular_inverse",
    "triangular_solve",
    "validate_model",
    "weighted_norm",
    "write_csv",
    "write_trajectory_csv",
]
