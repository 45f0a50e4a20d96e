"""Reference configurations and reproduction harnesses for the standard tables.

Three studies are bundled:

* the analytic-versus-Monte-Carlo comparison of expected occupation times of
  the rectangle [3, 15] x [-1, 1] across parameter settings and horizons;
* the observation study: a 4-region x 2-belt-speed occupation matrix at
  unit parameters used to exercise the parameter estimation;
* the recovery study: round-trip estimation from Monte-Carlo observations
  generated at ten known parameter triples.
"""

from __future__ import annotations

from typing import Sequence

from .analytic import QuadratureConfig, expected_occupation
from .estimation import (
    EstimationResult,
    ObservationSet,
    OptimizerConfig,
    estimate_params,
)
from .model import DEFAULT_STEPS_PER_UNIT_TIME, BeltConfig, ModelParams, Rect, TimeGrid
from .montecarlo import McConfig, McEstimate, mc_expected_occupation, mc_observation_matrix

__all__ = [
    "COMPARISON_RECT",
    "COMPARISON_SETTINGS",
    "COMPARISON_HORIZONS",
    "STUDY_REGIONS",
    "STUDY_SPEEDS",
    "STUDY_HORIZON",
    "RECOVERY_TRUE_PARAMS",
    "comparison_table",
    "observation_study",
    "recovery_study",
]

#: Rectangle of the analytic-versus-Monte-Carlo comparison.
COMPARISON_RECT = Rect(3.0, 15.0, -1.0, 1.0)

#: (params, belt) settings of the comparison, in column order.
COMPARISON_SETTINGS: tuple[tuple[ModelParams, BeltConfig], ...] = (
    (ModelParams(1.0, 1.0, 1.0), BeltConfig(1.0)),
    (ModelParams(1.0, 1.0, 1.0), BeltConfig(2.0)),
    (ModelParams(2.0, 2.0, 2.0), BeltConfig(1.0)),
    (ModelParams(2.0, 2.0, 2.0), BeltConfig(2.0)),
)

#: Horizons of the comparison table.
COMPARISON_HORIZONS: tuple[float, ...] = (7.0, 30.0, 50.0)

#: Regions of the observation study.
STUDY_REGIONS: tuple[Rect, ...] = (
    Rect(0.0, 1.0, -3.5, 3.5),
    Rect(0.5, 1.5, -2.5, 2.5),
    Rect(1.0, 2.5, -2.0, 2.0),
    Rect(1.5, 3.5, -1.25, 1.25),
)

#: Belt speeds of the observation study.
STUDY_SPEEDS: tuple[float, ...] = (1.0, 2.0)

#: Shared horizon of the observation study.
STUDY_HORIZON = 10.0

#: True parameter triples of the recovery study.
RECOVERY_TRUE_PARAMS: tuple[ModelParams, ...] = (
    ModelParams(0.50, 1.00, 1.50),
    ModelParams(0.60, 0.90, 1.40),
    ModelParams(0.70, 2.00, 1.75),
    ModelParams(1.00, 1.50, 1.30),
    ModelParams(1.25, 1.25, 2.50),
    ModelParams(1.40, 2.25, 0.80),
    ModelParams(1.50, 0.80, 1.75),
    ModelParams(2.00, 2.50, 2.50),
    ModelParams(2.25, 2.50, 1.50),
    ModelParams(2.50, 3.00, 3.00),
)


def comparison_table(
    num_paths: int = 10000,
    master_seed: int = 0,
    steps_per_unit_time: float = DEFAULT_STEPS_PER_UNIT_TIME,
    horizons: Sequence[float] = COMPARISON_HORIZONS,
    quad: QuadratureConfig | None = None,
) -> list[dict]:
    """Analytic and Monte-Carlo occupation times for every comparison setting.

    Returns one dict per (horizon, setting) pair with keys ``horizon``,
    ``lam``, ``sigma``, ``kappa``, ``analytic``, ``mc`` and ``mc_std_error``.
    """
    rows = []
    for horizon in horizons:
        grid = TimeGrid.with_resolution(horizon, steps_per_unit_time)
        for params, belt in COMPARISON_SETTINGS:
            analytic_value = expected_occupation(
                params, belt, COMPARISON_RECT, horizon, quad
            )
            estimate: McEstimate = mc_expected_occupation(
                params, belt, COMPARISON_RECT, McConfig(num_paths, master_seed, grid)
            )
            rows.append(
                {
                    "horizon": horizon,
                    "lam": params.lam,
                    "sigma": params.sigma1,
                    "kappa": belt.kappa,
                    "analytic": analytic_value,
                    "mc": estimate.mean,
                    "mc_std_error": estimate.std_error,
                }
            )
    return rows


def observation_study(
    num_paths: int = 5000,
    master_seed: int = 0,
    params: ModelParams = ModelParams(1.0, 1.0, 1.0),
    steps_per_unit_time: float = DEFAULT_STEPS_PER_UNIT_TIME,
) -> ObservationSet:
    """Monte-Carlo observation matrix over the study regions and belt speeds."""
    grid = TimeGrid.with_resolution(STUDY_HORIZON, steps_per_unit_time)
    return mc_observation_matrix(
        params,
        [BeltConfig(s) for s in STUDY_SPEEDS],
        STUDY_REGIONS,
        McConfig(num_paths, master_seed, grid),
    )


def recovery_study(
    num_paths: int = 5000,
    master_seed: int = 0,
    true_params: Sequence[ModelParams] = RECOVERY_TRUE_PARAMS,
    steps_per_unit_time: float = DEFAULT_STEPS_PER_UNIT_TIME,
    config: OptimizerConfig | None = None,
    quad: QuadratureConfig | None = None,
) -> list[dict]:
    """Round-trip recovery of each true parameter triple from Monte-Carlo data.

    Returns one dict per row with the true triple, the recovered triple, and
    the final residual.
    """
    rows = []
    for truth in true_params:
        obs = observation_study(num_paths, master_seed, truth, steps_per_unit_time)
        result: EstimationResult = estimate_params(obs, config, quad)
        rows.append(
            {
                "true_lam": truth.lam,
                "true_sigma1": truth.sigma1,
                "true_sigma2": truth.sigma2,
                "est_lam": result.params.lam,
                "est_sigma1": result.params.sigma1,
                "est_sigma2": result.params.sigma2,
                "cost": result.final_cost,
                "converged": result.converged,
            }
        )
    return rows
