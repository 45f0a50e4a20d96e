"""Exact expected occupation time of the lay-down process.

The expectation of the occupation time of a rectangle D = [a1,b1] x [a2,b2]
over [0, T] has the closed form

    E = integral_0^T  P(a1 <= Y1_t <= b1) * P(a2 <= Y2_t <= b2)  dt,

where each factor is a Gaussian interval probability with the moments of the
corresponding Ornstein-Uhlenbeck coordinate, i.e. one quarter of a product of
erf differences.  The integral is evaluated by adaptive Gauss-Kronrod
quadrature after the substitution t = u^2, which removes the sqrt(t)-type
behaviour of the integrand's derivatives at t = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

from .model import BeltConfig, ModelParams, Rect, ou_mean_sd
from .occupation import OccupationGrid

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "occupancy_integrand",
    "expected_occupation",
    "grid_expected_occupation",
]

_SQRT2 = math.sqrt(2.0)


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerance and refinement budget for the time integral."""

    abs_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if int(self.max_subdivisions) < 1:
            raise ValueError(
                f"max_subdivisions must be >= 1, got {self.max_subdivisions}"
            )
        object.__setattr__(self, "max_subdivisions", int(self.max_subdivisions))


def _normal_interval_prob(
    lo: float, hi: float, mean: np.ndarray, sd: np.ndarray, boundary_weight: float
) -> np.ndarray:
    """P(lo <= N(mean, sd) <= hi), elementwise over mean/sd arrays.

    For sd > 0 the erf difference is evaluated on the complementary branch
    whenever both standardized endpoints share a sign, which avoids the
    catastrophic cancellation of erf(z_hi) - erf(z_lo) deep in a tail.

    Where sd == 0 the distribution is a point mass and the factor is an
    indicator of ``mean`` in the interval, counting an endpoint hit with
    ``boundary_weight`` (1/2 for the t -> 0 limit of a diffusive coordinate,
    1 for a genuinely deterministic coordinate).
    """
    mean, sd = np.broadcast_arrays(
        np.asarray(mean, dtype=float), np.asarray(sd, dtype=float)
    )
    out = np.empty(mean.shape)
    positive = sd > 0
    if np.any(positive):
        m = mean[positive]
        s = sd[positive]
        z_lo = (lo - m) / (s * _SQRT2)
        z_hi = (hi - m) / (s * _SQRT2)
        p = 0.5 * (erf(z_hi) - erf(z_lo))
        p = np.where(z_lo >= 0, 0.5 * (erfc(z_lo) - erfc(z_hi)), p)
        p = np.where(z_hi <= 0, 0.5 * (erfc(-z_hi) - erfc(-z_lo)), p)
        out[positive] = np.maximum(p, 0.0)
    degenerate = ~positive
    if np.any(degenerate):
        m = mean[degenerate]
        if boundary_weight == 1.0:
            # deterministic coordinate: closed-interval indicator
            out[degenerate] = ((m >= lo) & (m <= hi)).astype(float)
        else:
            interior = (m > lo) & (m < hi)
            on_edge = ((m == lo) | (m == hi)) & (lo < hi)
            out[degenerate] = np.where(
                interior, 1.0, np.where(on_edge, boundary_weight, 0.0)
            )
    return out


def occupancy_integrand(
    params: ModelParams, belt: BeltConfig, region: Rect, t
) -> np.ndarray | float:
    """Probability that the process sits in ``region`` at time ``t``.

    This is the integrand of the expected-occupation integral: the product of
    the two Gaussian interval probabilities of the coordinates, equivalently
    a quarter of the product of erf differences.  Defined for all t >= 0:

    * at t = 0 the limit is 1 inside the rectangle, 0 outside, and a product
      of {0, 1/2, 1} factors when the origin lies on the boundary;
    * a coordinate with sigma = 0 contributes an indicator of its
      deterministic mean lying in the closed interval.

    Accepts a scalar or an array of times and returns values in [0, 1].
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    mean1, sd1, _, sd2 = ou_mean_sd(params, belt, t_arr)
    w1 = 0.5 if params.sigma1 > 0 else 1.0
    w2 = 0.5 if params.sigma2 > 0 else 1.0
    p1 = _normal_interval_prob(region.a1, region.b1, mean1, sd1, w1)
    p2 = _normal_interval_prob(region.a2, region.b2, np.zeros_like(t_arr), sd2, w2)
    result = p1 * p2
    return float(result[0]) if scalar else result


# 15-point Kronrod nodes with the embedded 7-point Gauss rule (abscissae on
# [-1, 1]; only the nonnegative half is stored, the rule is symmetric).
_KRONROD_NODES = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144838258730,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ]
)
_KRONROD_WEIGHTS = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_GAUSS_WEIGHTS = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

# full 15-node layout: negative half, then positive half (node 0 once)
_NODES = np.concatenate((-_KRONROD_NODES[:-1], _KRONROD_NODES[::-1]))
_WK = np.concatenate((_KRONROD_WEIGHTS[:-1], _KRONROD_WEIGHTS[::-1]))
_WG = np.zeros_like(_WK)
_WG[1:-1:2] = np.concatenate((_GAUSS_WEIGHTS[:-1], _GAUSS_WEIGHTS[::-1]))


def _kronrod_panel(f, a: float, b: float) -> tuple[float, float]:
    """Kronrod estimate and error indicator for one panel [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = f(mid + half * _NODES)
    kronrod = half * float(np.dot(_WK, fx))
    gauss = half * float(np.dot(_WG, fx))
    diff = abs(kronrod - gauss)
    return kronrod, min(diff, (200.0 * diff) ** 1.5)


def _adaptive_kronrod(
    f,
    a: float,
    b: float,
    quad: QuadratureConfig,
    interior_edges: tuple[float, ...] = (),
) -> float:
    """Globally adaptive bisection driven by the Gauss-Kronrod error indicator.

    ``interior_edges`` pins panel boundaries onto known sharp features; a
    near-discontinuity strictly inside a panel can otherwise hide in the
    node-free gap next to a panel endpoint, where the embedded error estimate
    is blind.
    """
    n_init = 8
    edges = set(np.linspace(a, b, n_init + 1))
    gap = (b - a) * 1e-12
    for edge in interior_edges:
        if a + gap < edge < b - gap:
            edges.add(edge)
    edges = sorted(edges)
    panels = []
    for left, right in zip(edges[:-1], edges[1:]):
        val, err = _kronrod_panel(f, left, right)
        panels.append((err, left, right, val))
    subdivisions = 0
    while True:
        total_err = sum(p[0] for p in panels)
        if total_err <= quad.abs_tol:
            return sum(p[3] for p in panels)
        if subdivisions >= quad.max_subdivisions:
            raise QuadratureError(
                f"needed more than {quad.max_subdivisions} subdivisions to reach "
                f"abs_tol={quad.abs_tol:g} (error estimate {total_err:g})"
            )
        worst = max(range(len(panels)), key=lambda i: panels[i][0])
        _, left, right, _ = panels[worst]
        mid = 0.5 * (left + right)
        val_l, err_l = _kronrod_panel(f, left, mid)
        val_r, err_r = _kronrod_panel(f, mid, right)
        panels[worst] = (err_l, left, mid, val_l)
        panels.append((err_r, mid, right, val_r))
        subdivisions += 1


def _mean_crossing_times(
    params: ModelParams, belt: BeltConfig, region: Rect, horizon: float
) -> tuple[float, ...]:
    """Times at which the drifting mean crosses the region's y1-edges.

    When sigma1 is small the integrand is a near-step at these times, so the
    quadrature must place panel boundaries there.  The mean is strictly
    increasing for kappa > 0, so each edge is crossed at most once; the
    crossing is located by bisection.
    """
    if belt.kappa == 0.0:
        return ()
    lam = params.lam

    def mean(t: float) -> float:
        return (belt.kappa / lam) * (lam * t + math.expm1(-lam * t))

    crossings = []
    reach = mean(horizon)
    for edge in (region.a1, region.b1):
        if 0.0 < edge < reach:
            lo, hi = 0.0, horizon
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if mean(mid) < edge:
                    lo = mid
                else:
                    hi = mid
            crossings.append(0.5 * (lo + hi))
    return tuple(crossings)


def expected_occupation(
    params: ModelParams,
    belt: BeltConfig,
    region: Rect,
    horizon: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """Expected occupation time of ``region`` over [0, horizon].

    Integrates ``occupancy_integrand`` in the substituted variable u = sqrt(t)
    (dt = 2u du), where the integrand is smooth except where the drifting
    mean crosses a region edge; those crossing times become panel boundaries.
    Panels are refined adaptively until the absolute error estimate drops
    below ``quad.abs_tol``.  The result lies in [0, horizon].

    Raises
    ------
    QuadratureError
        If the refinement budget is exhausted before the tolerance is met.
    """
    horizon = float(horizon)
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    if quad is None:
        quad = QuadratureConfig()

    def transformed(u: np.ndarray) -> np.ndarray:
        return 2.0 * u * occupancy_integrand(params, belt, region, u * u)

    pinned = tuple(
        math.sqrt(t) for t in _mean_crossing_times(params, belt, region, horizon)
    )
    value = _adaptive_kronrod(transformed, 0.0, math.sqrt(horizon), quad, pinned)
    return min(max(value, 0.0), horizon)


def grid_expected_occupation(
    params: ModelParams,
    belt: BeltConfig,
    bounds: Rect,
    nx: int,
    ny: int,
    horizon: float,
    quad: QuadratureConfig | None = None,
) -> OccupationGrid:
    """Expected occupation time of every cell of an nx-by-ny partition of bounds.

    Cell values sum to the expected occupation of ``bounds`` within
    nx*ny*abs_tol.  A quadrature failure is re-raised naming the offending
    cell.
    """
    nx = int(nx)
    ny = int(ny)
    if nx < 1 or ny < 1:
        raise ValueError(f"grid needs nx >= 1 and ny >= 1, got {nx}x{ny}")
    xs = np.linspace(bounds.a1, bounds.b1, nx + 1)
    ys = np.linspace(bounds.a2, bounds.b2, ny + 1)
    values = np.empty((nx, ny))
    for p in range(nx):
        for q in range(ny):
            cell = Rect(xs[p], xs[p + 1], ys[q], ys[q + 1])
            try:
                values[p, q] = expected_occupation(params, belt, cell, horizon, quad)
            except QuadratureError as exc:
                raise QuadratureError(f"cell ({p}, {q}) of the grid: {exc}") from exc
    return OccupationGrid(bounds, nx, ny, values)
