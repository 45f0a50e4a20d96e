"""Occupation-time functionals of a realized path over rectangles, grids, and strips.

Two quadrature rules are provided for the time integral of the rectangle
indicator along a path:

* ``occupation_time_sampled`` -- left-endpoint rule on the path's own time
  stamps; the natural discretization for densely sampled simulated paths.
* ``occupation_time_polyline`` -- treats the path as piecewise linear and
  clips each segment against the rectangle; exact for polylines and the
  right choice for coarsely sampled ingested paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FiberPath, Rect

__all__ = [
    "OccupationGrid",
    "occupation_time_sampled",
    "occupation_time_polyline",
    "grid_occupation",
    "strip_profile",
]


@dataclass(frozen=True)
class OccupationGrid:
    """Occupation times over an nx-by-ny partition of a bounding rectangle.

    ``values[p, q]`` is the occupation time of the cell with x-index p
    (increasing y1) and y-index q (increasing y2).  Cells tile ``bounds``
    exactly: interior edges are half-open (lower edge inclusive) so no time
    is counted twice.
    """

    bounds: Rect
    nx: int
    ny: int
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"grid needs nx >= 1 and ny >= 1, got {self.nx}x{self.ny}")
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.nx, self.ny):
            raise ValueError(
                f"values shape {values.shape} does not match grid {self.nx}x{self.ny}"
            )
        if np.any(values < 0):
            raise ValueError("occupation times must be >= 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def x_edges(self) -> np.ndarray:
        return np.linspace(self.bounds.a1, self.bounds.b1, self.nx + 1)

    def y_edges(self) -> np.ndarray:
        return np.linspace(self.bounds.a2, self.bounds.b2, self.ny + 1)

    def x_centers(self) -> np.ndarray:
        edges = self.x_edges()
        return 0.5 * (edges[:-1] + edges[1:])

    def y_centers(self) -> np.ndarray:
        edges = self.y_edges()
        return 0.5 * (edges[:-1] + edges[1:])

    def total(self) -> float:
        return float(self.values.sum())


def _occupation_from_weights(
    weights: np.ndarray, x: np.ndarray, y: np.ndarray, region: Rect
) -> float:
    """Sum of weights at samples lying in the closed rectangle."""
    inside = (x >= region.a1) & (x <= region.b1) & (y >= region.a2) & (y <= region.b2)
    return float(weights[inside].sum())


def occupation_time_sampled(path: FiberPath, region: Rect) -> float:
    """Left-endpoint occupation time of a sampled path.

    Sample i contributes its full inter-sample interval whenever it lies in
    the closed rectangle: sum_i 1_D(points[i]) * (times[i+1] - times[i]).
    The last sample carries no weight.  The result lies in [0, duration].
    """
    if len(path) < 2:
        return 0.0
    weights = np.diff(path.times)
    return _occupation_from_weights(
        weights, path.points[:-1, 0], path.points[:-1, 1], region
    )


def _segment_interval(
    p0: np.ndarray,
    p1: np.ndarray,
    lo: float,
    hi: float,
    open_upper: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Parameter interval [t0, t1] where p0 + t*(p1-p0) lies in one slab.

    Stationary coordinates (p0 == p1) reduce to a membership test; the
    ``open_upper`` flag then excludes points lying exactly on the upper edge
    (used for interior grid edges so adjacent cells never both claim a
    segment running along their shared boundary).
    """
    d = p1 - p0
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (lo - p0) / d
        tb = (hi - p0) / d
    t0 = np.where(d > 0, ta, tb)
    t1 = np.where(d > 0, tb, ta)
    if open_upper:
        stationary_in = (p0 >= lo) & (p0 < hi)
    else:
        stationary_in = (p0 >= lo) & (p0 <= hi)
    zero = d == 0
    t0 = np.where(zero, np.where(stationary_in, 0.0, 1.0), t0)
    t1 = np.where(zero, np.where(stationary_in, 1.0, 0.0), t1)
    return t0, t1


def _polyline_fractions(
    path: FiberPath,
    region: Rect,
    open_upper_x: bool = False,
    open_upper_y: bool = False,
) -> np.ndarray:
    """Fraction of each segment's parameter range inside the rectangle."""
    pts = path.points
    x0, x1 = pts[:-1, 0], pts[1:, 0]
    y0, y1 = pts[:-1, 1], pts[1:, 1]
    tx0, tx1 = _segment_interval(x0, x1, region.a1, region.b1, open_upper_x)
    ty0, ty1 = _segment_interval(y0, y1, region.a2, region.b2, open_upper_y)
    t0 = np.maximum(np.maximum(tx0, ty0), 0.0)
    t1 = np.minimum(np.minimum(tx1, ty1), 1.0)
    return np.maximum(t1 - t0, 0.0)


def occupation_time_polyline(path: FiberPath, region: Rect) -> float:
    """Occupation time of the piecewise-linear interpolant of a path.

    Each segment is traversed at constant speed, so the time spent inside the
    rectangle is the segment duration times the clipped fraction of its
    parameter range.  Exact for polylines; requires at least two samples.
    """
    if len(path) < 2:
        raise ValueError("occupation_time_polyline needs a path with >= 2 samples")
    dt = np.diff(path.times)
    return float(np.sum(dt * _polyline_fractions(path, region)))


def grid_occupation(path: FiberPath, bounds: Rect, nx: int, ny: int) -> OccupationGrid:
    """Polyline occupation time of every cell of an nx-by-ny partition of bounds.

    Interior cell edges are half-open (lower edge inclusive) so the cells
    partition ``bounds`` exactly and the cell values sum to the occupation
    time of the whole rectangle up to rounding.
    """
    nx = int(nx)
    ny = int(ny)
    if nx < 1 or ny < 1:
        raise ValueError(f"grid needs nx >= 1 and ny >= 1, got {nx}x{ny}")
    if len(path) < 2:
        raise ValueError("grid_occupation needs a path with >= 2 samples")
    xs = np.linspace(bounds.a1, bounds.b1, nx + 1)
    ys = np.linspace(bounds.a2, bounds.b2, ny + 1)
    dt = np.diff(path.times)
    values = np.empty((nx, ny))
    for p in range(nx):
        for q in range(ny):
            cell = Rect(xs[p], xs[p + 1], ys[q], ys[q + 1])
            frac = _polyline_fractions(
                path,
                cell,
                open_upper_x=(p < nx - 1),
                open_upper_y=(q < ny - 1),
            )
            values[p, q] = np.sum(dt * frac)
    return OccupationGrid(bounds, nx, ny, values)


def strip_profile(path: FiberPath, bounds: Rect, n_strips: int) -> np.ndarray:
    """Occupation times of n vertical strips of uniform width, by increasing y1."""
    grid = grid_occupation(path, bounds, n_strips, 1)
    return grid.values[:, 0].copy()
