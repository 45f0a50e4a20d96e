"""Moving-belt fiber lay-down: simulation, occupation times, parameter estimation.

The deposition of a fiber on a moving conveyor belt is modelled as a
two-dimensional Ornstein-Uhlenbeck process whose first coordinate tracks the
belt motion.  This package simulates sample paths, computes occupation times
of rectangular regions (the stand-in for deposited mass per area), evaluates
the closed-form expected occupation time, and recovers the process parameters
from occupation-time observations by least squares.
"""

from .analytic import (
    QuadratureConfig,
    QuadratureError,
    expected_occupation,
    grid_expected_occupation,
    occupancy_integrand,
)
from .estimation import (
    DegenerateObservationsError,
    EstimationResult,
    LaydownEstimator,
    NelderMeadResult,
    NotFittedError,
    ObservationSet,
    OptimizerConfig,
    cost,
    estimate_params,
    nelder_mead,
)
from .io import (
    FileFormatError,
    load_fiber_path,
    load_observations,
    write_fiber_path,
    write_grid_csv,
    write_observations,
    write_strips_csv,
)
from .model import (
    BeltConfig,
    FiberPath,
    ModelParams,
    Rect,
    TimeGrid,
    derive_path_seed,
    ou_mean_sd,
    simulate_path,
)
from .montecarlo import McConfig, McEstimate, mc_expected_occupation, mc_observation_matrix
from .occupation import (
    OccupationGrid,
    grid_occupation,
    occupation_time_polyline,
    occupation_time_sampled,
    strip_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BeltConfig",
    "DegenerateObservationsError",
    "EstimationResult",
    "FiberPath",
    "FileFormatError",
    "LaydownEstimator",
    "McConfig",
    "McEstimate",
    "ModelParams",
    "NelderMeadResult",
    "NotFittedError",
    "ObservationSet",
    "OccupationGrid",
    "OptimizerConfig",
    "QuadratureConfig",
    "QuadratureError",
    "Rect",
    "TimeGrid",
    "cost",
    "derive_path_seed",
    "estimate_params",
    "expected_occupation",
    "grid_expected_occupation",
    "grid_occupation",
    "load_fiber_path",
    "load_observations",
    "mc_expected_occupation",
    "mc_observation_matrix",
    "nelder_mead",
    "occupancy_integrand",
    "occupation_time_polyline",
    "occupation_time_sampled",
    "ou_mean_sd",
    "simulate_path",
    "strip_profile",
    "write_fiber_path",
    "write_grid_csv",
    "write_observations",
    "write_strips_csv",
]
