"""Least-squares recovery of (lam, sigma1, sigma2) from occupation-time data.

Given observed occupation times E[i, j] for regions D_i and belt speeds
kappa_j over a common horizon T, the residual

    R(lam, sigma1, sigma2) = sum_ij (E_model(D_i, kappa_j, T) - E[i, j])^2

is minimized with a self-contained Nelder-Mead simplex search.  The search
runs in log-parameter space, so positivity of the recovered parameters is
structural rather than enforced by penalties.

Two interfaces are provided: the functional ``estimate_params`` and the
scikit-learn style ``LaydownEstimator`` with ``fit``/``predict``/
``get_params``/``set_params``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analytic import QuadratureConfig, expected_occupation
from .model import BeltConfig, ModelParams, Rect

__all__ = [
    "ObservationSet",
    "EstimationResult",
    "OptimizerConfig",
    "NelderMeadResult",
    "DegenerateObservationsError",
    "NotFittedError",
    "cost",
    "nelder_mead",
    "estimate_params",
    "LaydownEstimator",
]


class DegenerateObservationsError(ValueError):
    """Observations carry no information about the parameters."""


class NotFittedError(ValueError, AttributeError):
    """The estimator must be fitted before calling this method."""


@dataclass(frozen=True)
class ObservationSet:
    """Occupation-time observations E[i, j] for regions i and belt speeds j.

    ``values`` has one row per region and one column per belt speed; all
    observations share the horizon T.  Estimation additionally needs at least
    three observations (as many as there are unknown parameters), which
    :func:`estimate_params` enforces.
    """

    regions: tuple[Rect, ...]
    belt_speeds: tuple[float, ...]
    horizon: float
    values: np.ndarray

    def __post_init__(self) -> None:
        regions = tuple(self.regions)
        speeds = tuple(float(s) for s in self.belt_speeds)
        horizon = float(self.horizon)
        values = np.asarray(self.values, dtype=float)
        if horizon <= 0 or not math.isfinite(horizon):
            raise ValueError(f"horizon must be positive and finite, got {horizon}")
        if len(regions) == 0 or len(speeds) == 0:
            raise ValueError("need at least one region and one belt speed")
        if any(s < 0 for s in speeds):
            raise ValueError(f"belt speeds must be >= 0, got {speeds}")
        if values.shape != (len(regions), len(speeds)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(regions)} regions x {len(speeds)} belt speeds"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("observations must be finite")
        if np.any(values < 0) or np.any(values > horizon):
            raise ValueError("occupation times must lie in [0, horizon]")
        values.setflags(write=False)
        object.__setattr__(self, "regions", regions)
        object.__setattr__(self, "belt_speeds", speeds)
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def to_design_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Flatten to (X, y) rows of (a1, b1, a2, b2, kappa, horizon) and E."""
        rows = []
        targets = []
        for i, region in enumerate(self.regions):
            for j, kappa in enumerate(self.belt_speeds):
                rows.append(
                    (region.a1, region.b1, region.a2, region.b2, kappa, self.horizon)
                )
                targets.append(self.values[i, j])
        return np.asarray(rows, dtype=float), np.asarray(targets, dtype=float)


@dataclass(frozen=True)
class EstimationResult:
    """Recovered parameters with the final residual and optimizer diagnostics."""

    params: ModelParams
    final_cost: float
    iterations: int
    converged: bool

    def __post_init__(self) -> None:
        if self.final_cost < 0:
            raise ValueError(f"final_cost must be >= 0, got {self.final_cost}")


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the simplex search.

    The reflection/expansion/contraction/shrink coefficients default to the
    standard (1, 2, 1/2, 1/2).  ``initial_step`` is the per-coordinate offset
    of the initial simplex in log-parameter space (roughly a 5% multiplicative
    perturbation).  With ``multi_start`` the search is repeated from the
    initial guess scaled by each entry of ``ladder_scales`` and the best final
    value wins.
    """

    initial_guess: ModelParams = field(default_factory=lambda: ModelParams(1.0, 1.0, 1.0))
    x_tol: float = 1e-6
    f_tol: float = 1e-10
    max_evals: int = 5000
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    initial_step: float = 0.05
    multi_start: bool = False
    ladder_scales: tuple[float, ...] = (1.0, 0.1, 0.01, 10.0)

    def __post_init__(self) -> None:
        if self.x_tol <= 0 or self.f_tol <= 0:
            raise ValueError("x_tol and f_tol must be > 0")
        if int(self.max_evals) < 1:
            raise ValueError(f"max_evals must be >= 1, got {self.max_evals}")
        object.__setattr__(self, "max_evals", int(self.max_evals))
        if self.reflection <= 0:
            raise ValueError("reflection coefficient must be > 0")
        if self.expansion <= 1:
            raise ValueError("expansion coefficient must be > 1")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must be in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must be in (0, 1)")
        if self.initial_step <= 0:
            raise ValueError("initial_step must be > 0")
        if self.multi_start and len(self.ladder_scales) == 0:
            raise ValueError("multi_start requires at least one ladder scale")


@dataclass(frozen=True)
class NelderMeadResult:
    """Best vertex found, its value, and search diagnostics."""

    x: np.ndarray
    fun: float
    iterations: int
    n_evals: int
    converged: bool


def cost(
    params: ModelParams, obs: ObservationSet, quad: QuadratureConfig | None = None
) -> float:
    """Sum of squared deviations between model and observed occupation times."""
    total = 0.0
    for i, region in enumerate(obs.regions):
        for j, kappa in enumerate(obs.belt_speeds):
            predicted = expected_occupation(
                params, BeltConfig(kappa), region, obs.horizon, quad
            )
            residual = predicted - obs.values[i, j]
            total += residual * residual
    return total


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    start: Sequence[float],
    config: OptimizerConfig | None = None,
) -> NelderMeadResult:
    """Minimize an objective with the Nelder-Mead simplex algorithm.

    The initial simplex offsets each coordinate of ``start`` by
    ``config.initial_step``.  Iterations apply the standard reflect / expand /
    contract / shrink moves; the search stops when the simplex diameter (in
    the max norm, measured from the best vertex) falls below ``x_tol`` and the
    value spread below ``f_tol``, or when ``max_evals`` evaluations have been
    spent.  Deterministic for deterministic objectives.
    """
    if config is None:
        config = OptimizerConfig()
    x0 = np.asarray(start, dtype=float)
    n = x0.shape[0]
    alpha, gamma = config.reflection, config.expansion
    rho, sigma = config.contraction, config.shrink

    vertices = [x0.copy()]
    for i in range(n):
        v = x0.copy()
        v[i] += config.initial_step
        vertices.append(v)
    values = [float(objective(v)) for v in vertices]
    n_evals = n + 1
    iterations = 0
    converged = False

    while True:
        order = sorted(range(n + 1), key=lambda i: values[i])
        vertices = [vertices[i] for i in order]
        values = [values[i] for i in order]
        diameter = max(np.max(np.abs(v - vertices[0])) for v in vertices[1:])
        spread = values[-1] - values[0]
        if diameter < config.x_tol and spread < config.f_tol:
            converged = True
            break
        if n_evals >= config.max_evals:
            break
        iterations += 1

        centroid = np.mean(vertices[:-1], axis=0)
        worst = vertices[-1]
        reflected = centroid + alpha * (centroid - worst)
        f_reflected = float(objective(reflected))
        n_evals += 1

        if f_reflected < values[0]:
            expanded = centroid + gamma * (centroid - worst)
            f_expanded = float(objective(expanded))
            n_evals += 1
            if f_expanded < f_reflected:
                vertices[-1], values[-1] = expanded, f_expanded
            else:
                vertices[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            vertices[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = centroid + rho * (reflected - centroid)
            else:
                contracted = centroid - rho * (centroid - worst)
            f_contracted = float(objective(contracted))
            n_evals += 1
            if f_contracted < min(f_reflected, values[-1]):
                vertices[-1], values[-1] = contracted, f_contracted
            else:
                best = vertices[0]
                for i in range(1, n + 1):
                    vertices[i] = best + sigma * (vertices[i] - best)
                    values[i] = float(objective(vertices[i]))
                n_evals += n

    return NelderMeadResult(
        x=vertices[0].copy(),
        fun=values[0],
        iterations=iterations,
        n_evals=n_evals,
        converged=converged,
    )


def _check_informative(obs: ObservationSet) -> None:
    if obs.values.size < 3:
        raise ValueError(
            f"need at least 3 observations to identify 3 parameters, "
            f"got {obs.values.size}"
        )
    if np.all(obs.values == 0.0):
        raise DegenerateObservationsError(
            "all observations are 0; the residual is flat and the parameters "
            "are unidentifiable"
        )
    if np.all(obs.values == obs.horizon):
        raise DegenerateObservationsError(
            "all observations equal the horizon; the residual is flat and the "
            "parameters are unidentifiable"
        )


def _minimize_residual(
    rows: Sequence[tuple[Rect, float, float]],
    targets: np.ndarray,
    config: OptimizerConfig,
    quad: QuadratureConfig | None,
) -> EstimationResult:
    """Log-space simplex minimization of the squared-residual sum over rows."""

    def objective(u: np.ndarray) -> float:
        params = ModelParams(math.exp(u[0]), math.exp(u[1]), math.exp(u[2]))
        total = 0.0
        for (region, kappa, horizon), target in zip(rows, targets):
            predicted = expected_occupation(
                params, BeltConfig(kappa), region, horizon, quad
            )
            total += (predicted - target) ** 2
        return total

    guess = config.initial_guess
    base = np.log([guess.lam, guess.sigma1, guess.sigma2])
    scales = config.ladder_scales if config.multi_start else (1.0,)

    best: NelderMeadResult | None = None
    total_iterations = 0
    for scale in scales:
        result = nelder_mead(objective, base + math.log(scale), config)
        total_iterations += result.iterations
        if best is None or result.fun < best.fun:
            best = result

    if not best.converged:
        warnings.warn(
            "simplex search exhausted its evaluation budget before converging",
            RuntimeWarning,
            stacklevel=3,
        )
    abs_tol = quad.abs_tol if quad is not None else QuadratureConfig().abs_tol
    _warn_if_flat(objective, best.x, best.fun, len(rows), abs_tol)
    return EstimationResult(
        params=ModelParams(*np.exp(best.x)),
        final_cost=best.fun,
        iterations=total_iterations,
        converged=best.converged,
    )


_FLAT_PROBE_STEP = 0.05


def _warn_if_flat(
    objective, x_min: np.ndarray, f_min: float, n_terms: int, abs_tol: float
) -> None:
    """Warn when the residual does not respond to a parameter at the minimum.

    The observations then carry no information about that parameter (for
    example, regions much wider than the lateral spread leave sigma2 free).
    A probe that moves the residual by less than the quadrature noise floor
    (each squared term wobbles by ~ 2*|residual|*abs_tol) counts as flat.
    """
    noise_floor = max(1e-12, 4.0 * math.sqrt(n_terms * max(f_min, 0.0)) * abs_tol)
    names = ("lam", "sigma1", "sigma2")
    flat = []
    for i, name in enumerate(names):
        change = 0.0
        for sign in (1.0, -1.0):
            probe = x_min.copy()
            probe[i] += sign * _FLAT_PROBE_STEP
            change = max(change, abs(objective(probe) - f_min))
        if change < noise_floor:
            flat.append(name)
    if flat:
        warnings.warn(
            f"the residual is flat along {', '.join(flat)} near the minimum; "
            f"these observations do not identify the flagged parameter(s)",
            RuntimeWarning,
            stacklevel=4,
        )


def estimate_params(
    obs: ObservationSet,
    config: OptimizerConfig | None = None,
    quad: QuadratureConfig | None = None,
) -> EstimationResult:
    """Recover (lam, sigma1, sigma2) minimizing the least-squares residual.

    The search runs over the componentwise logarithm of the parameters, so
    every iterate maps to a valid parameter triple.  With
    ``config.multi_start`` the simplex search is restarted from the initial
    guess scaled by each ladder entry and the lowest final residual wins.

    Raises
    ------
    DegenerateObservationsError
        If every observation is 0 or every observation equals the horizon.
    """
    if config is None:
        config = OptimizerConfig()
    _check_informative(obs)
    rows = [
        (region, kappa, obs.horizon)
        for region in obs.regions
        for kappa in obs.belt_speeds
    ]
    return _minimize_residual(rows, obs.values.reshape(-1), config, quad)


def _flat_rows(X) -> list[tuple[Rect, float, float]]:
    """Validate a design matrix into (region, kappa, horizon) rows."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 6:
        raise ValueError(
            "X must be an (n, 6) array of rows (a1, b1, a2, b2, kappa, horizon)"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("X must be finite")
    rows = []
    for a1, b1, a2, b2, kappa, horizon in arr:
        if horizon <= 0:
            raise ValueError(f"horizon must be > 0, got {horizon}")
        if kappa < 0:
            raise ValueError(f"belt speed must be >= 0, got {kappa}")
        rows.append((Rect(a1, b1, a2, b2), float(kappa), float(horizon)))
    return rows


class LaydownEstimator:
    """Scikit-learn style estimator recovering lay-down process parameters.

    Observations can be passed to :meth:`fit` either as an
    :class:`ObservationSet` or as a design matrix ``X`` of shape (n, 6) with
    rows ``(a1, b1, a2, b2, kappa, horizon)`` and a target vector ``y`` of
    observed occupation times.  After fitting, the recovered parameters are
    available as ``lambda_``, ``sigma1_`` and ``sigma2_`` and
    :meth:`predict` returns model occupation times for new rows.

    Parameters
    ----------
    initial_guess : tuple of float, default (1, 1, 1)
        Starting point (lam, sigma1, sigma2) of the simplex search.
    multi_start : bool, default False
        Restart the search from the guess scaled by each ladder entry and
        keep the best final residual.
    ladder_scales : tuple of float
        Scale factors of the multi-start ladder.
    x_tol, f_tol : float
        Simplex convergence tolerances (diameter in log-parameter space and
        value spread).
    max_evals : int
        Evaluation budget per simplex run.
    quad_tol : float
        Absolute tolerance of the occupation-time quadrature.
    """

    def __init__(
        self,
        initial_guess: tuple[float, float, float] = (1.0, 1.0, 1.0),
        multi_start: bool = False,
        ladder_scales: tuple[float, ...] = (1.0, 0.1, 0.01, 10.0),
        x_tol: float = 1e-6,
        f_tol: float = 1e-10,
        max_evals: int = 5000,
        quad_tol: float = 1e-8,
    ) -> None:
        self.initial_guess = initial_guess
        self.multi_start = multi_start
        self.ladder_scales = ladder_scales
        self.x_tol = x_tol
        self.f_tol = f_tol
        self.max_evals = max_evals
        self.quad_tol = quad_tol

    _param_names = (
        "initial_guess",
        "multi_start",
        "ladder_scales",
        "x_tol",
        "f_tol",
        "max_evals",
        "quad_tol",
    )

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params) -> "LaydownEstimator":
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(
                    f"invalid parameter {name!r} for LaydownEstimator; "
                    f"valid parameters are {self._param_names}"
                )
            setattr(self, name, value)
        return self

    def _optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            initial_guess=ModelParams(*self.initial_guess),
            x_tol=self.x_tol,
            f_tol=self.f_tol,
            max_evals=self.max_evals,
            multi_start=self.multi_start,
            ladder_scales=tuple(self.ladder_scales),
        )

    def _quad_config(self) -> QuadratureConfig:
        return QuadratureConfig(abs_tol=self.quad_tol)

    def fit(self, X, y=None) -> "LaydownEstimator":
        """Recover the process parameters from occupation-time observations."""
        if isinstance(X, ObservationSet):
            if y is not None:
                raise ValueError("y must be None when X is an ObservationSet")
            result = estimate_params(X, self._optimizer_config(), self._quad_config())
        else:
            rows = _flat_rows(X)
            targets = np.asarray(y, dtype=float)
            if targets.shape != (len(rows),):
                raise ValueError(
                    f"y must have shape ({len(rows)},), got {targets.shape}"
                )
            result = self._fit_rows(rows, targets)
        self.result_ = result
        self.lambda_ = result.params.lam
        self.sigma1_ = result.params.sigma1
        self.sigma2_ = result.params.sigma2
        self.cost_ = result.final_cost
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        return self

    def _fit_rows(
        self, rows: list[tuple[Rect, float, float]], targets: np.ndarray
    ) -> EstimationResult:
        if targets.size < 3:
            raise ValueError("need at least 3 observations to identify 3 parameters")
        return _minimize_residual(
            rows, targets, self._optimizer_config(), self._quad_config()
        )

    def _fitted_params(self) -> ModelParams:
        if not hasattr(self, "result_"):
            raise NotFittedError(
                "this LaydownEstimator is not fitted yet; call fit first"
            )
        return self.result_.params

    def predict(self, X) -> np.ndarray:
        """Model expected occupation times for rows (a1, b1, a2, b2, kappa, horizon)."""
        params = self._fitted_params()
        if isinstance(X, ObservationSet):
            rows = [
                (region, kappa, X.horizon)
                for region in X.regions
                for kappa in X.belt_speeds
            ]
        else:
            rows = _flat_rows(X)
        quad = self._quad_config()
        return np.array(
            [
                expected_occupation(params, BeltConfig(kappa), region, horizon, quad)
                for region, kappa, horizon in rows
            ]
        )

    def score(self, X, y=None) -> float:
        """Negative sum of squared residuals (higher is better)."""
        predicted = self.predict(X)
        if isinstance(X, ObservationSet):
            observed = X.values.reshape(-1)
        else:
            observed = np.asarray(y, dtype=float)
        return -float(np.sum((predicted - observed) ** 2))

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={getattr(self, k)!r}" for k in self._param_names)
        return f"LaydownEstimator({args})"
