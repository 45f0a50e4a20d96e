"""File ingestion and CSV emission for paths, observations, grids, and strips.

Path files are delimiter-separated (comma or whitespace) numeric tables with
columns (t, y1, y2) and an optional header line.  Observation files are
line-oriented keyed documents::

    T 10
    kappa 1 2
    region 0 1.0 -3.5 3.5
    region 0.5 1.5 -2.5 2.5
    region 1.0 2.5 -2.0 2.0
    E
    1.23698 0.81322
    1.16451 0.70939
    1.63478 0.93958

Numbers written to files carry full round-trip precision.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from .estimation import ObservationSet
from .model import FiberPath, Rect
from .occupation import OccupationGrid

__all__ = [
    "FileFormatError",
    "load_fiber_path",
    "write_fiber_path",
    "load_observations",
    "write_observations",
    "write_grid_csv",
    "write_strips_csv",
]

Source = Union[str, Path, IO[str]]


class FileFormatError(ValueError):
    """A data file could not be parsed; the message names the offending line."""


def _read_lines(source: Source) -> list[str]:
    if hasattr(source, "read"):
        return source.read().splitlines()
    return Path(source).read_text().splitlines()


def _open_out(dest: Source):
    if hasattr(dest, "write"):
        return dest, False
    return open(dest, "w"), True


def _tokenize(line: str) -> list[str]:
    return line.replace(",", " ").split()


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_fiber_path(source: Source) -> FiberPath:
    """Parse a (t, y1, y2) table into a fiber path.

    A header line is skipped if its first field is non-numeric.  Time stamps
    are shifted so the path starts at t = 0 (differences are preserved).

    Raises
    ------
    FileFormatError
        On an empty file, a non-numeric field, a wrong column count, or a
        non-increasing time column; the message carries the line number.
    """
    lines = _read_lines(source)
    records: list[tuple[float, float, float]] = []
    record_lines: list[int] = []
    for lineno, raw in enumerate(lines, start=1):
        tokens = _tokenize(raw)
        if not tokens or tokens[0].startswith("#"):
            continue
        if not records and not _is_number(tokens[0]):
            continue  # header
        if len(tokens) != 3:
            raise FileFormatError(
                f"line {lineno}: expected 3 columns (t, y1, y2), got {len(tokens)}"
            )
        if not all(_is_number(tok) for tok in tokens):
            bad = next(tok for tok in tokens if not _is_number(tok))
            raise FileFormatError(f"line {lineno}: non-numeric field {bad!r}")
        t, y1, y2 = (float(tok) for tok in tokens)
        if not (math.isfinite(t) and math.isfinite(y1) and math.isfinite(y2)):
            raise FileFormatError(f"line {lineno}: non-finite value")
        records.append((t, y1, y2))
        record_lines.append(lineno)
    if not records:
        raise FileFormatError("no records")
    data = np.asarray(records)
    times = data[:, 0]
    steps = np.diff(times)
    if np.any(steps <= 0):
        bad_index = int(np.argmax(steps <= 0)) + 1
        raise FileFormatError(
            f"line {record_lines[bad_index]}: time stamps must be strictly "
            f"increasing (t={times[bad_index]:g} after t={times[bad_index - 1]:g})"
        )
    return FiberPath(times - times[0], data[:, 1:])


def write_fiber_path(path: FiberPath, dest: Source) -> None:
    """Write a path as CSV with header ``t,y1,y2`` at full precision."""
    stream, owned = _open_out(dest)
    try:
        stream.write("t,y1,y2\n")
        for t, (y1, y2) in zip(path.times, path.points):
            stream.write(f"{t:.17g},{y1:.17g},{y2:.17g}\n")
    finally:
        if owned:
            stream.close()


def load_observations(source: Source) -> ObservationSet:
    """Parse a keyed observation document into an :class:`ObservationSet`."""
    lines = _read_lines(source)
    horizon: float | None = None
    speeds: list[float] | None = None
    regions: list[Rect] = []
    matrix: list[list[float]] = []
    in_matrix = False
    for lineno, raw in enumerate(lines, start=1):
        tokens = _tokenize(raw)
        if not tokens or tokens[0].startswith("#"):
            continue
        key = tokens[0].lower()
        if in_matrix:
            if not all(_is_number(tok) for tok in tokens):
                raise FileFormatError(f"line {lineno}: non-numeric matrix entry")
            matrix.append([float(tok) for tok in tokens])
            continue
        if key == "t":
            if len(tokens) != 2 or not _is_number(tokens[1]):
                raise FileFormatError(f"line {lineno}: expected 'T <value>'")
            horizon = float(tokens[1])
        elif key == "kappa":
            if len(tokens) < 2 or not all(_is_number(tok) for tok in tokens[1:]):
                raise FileFormatError(f"line {lineno}: expected 'kappa <v1> <v2> ...'")
            speeds = [float(tok) for tok in tokens[1:]]
        elif key == "region":
            if len(tokens) != 5 or not all(_is_number(tok) for tok in tokens[1:]):
                raise FileFormatError(f"line {lineno}: expected 'region a1 b1 a2 b2'")
            try:
                regions.append(Rect(*(float(tok) for tok in tokens[1:])))
            except ValueError as exc:
                raise FileFormatError(f"line {lineno}: {exc}") from exc
        elif key == "e" and len(tokens) == 1:
            in_matrix = True
        else:
            raise FileFormatError(f"line {lineno}: unrecognized directive {tokens[0]!r}")
    if horizon is None:
        raise FileFormatError("missing 'T <value>' line")
    if speeds is None:
        raise FileFormatError("missing 'kappa ...' line")
    if not regions:
        raise FileFormatError("missing 'region ...' lines")
    if len(matrix) != len(regions):
        raise FileFormatError(
            f"matrix has {len(matrix)} rows but {len(regions)} regions are declared"
        )
    if any(len(row) != len(speeds) for row in matrix):
        raise FileFormatError(
            f"every matrix row must have {len(speeds)} entries (one per belt speed)"
        )
    try:
        return ObservationSet(
            regions=tuple(regions),
            belt_speeds=tuple(speeds),
            horizon=horizon,
            values=np.asarray(matrix),
        )
    except ValueError as exc:
        raise FileFormatError(str(exc)) from exc


def write_observations(obs: ObservationSet, dest: Source) -> None:
    """Write an observation set in the keyed document format."""
    stream, owned = _open_out(dest)
    try:
        stream.write(f"T {obs.horizon:.17g}\n")
        stream.write("kappa " + " ".join(f"{s:.17g}" for s in obs.belt_speeds) + "\n")
        for region in obs.regions:
            stream.write(
                f"region {region.a1:.17g} {region.b1:.17g} "
                f"{region.a2:.17g} {region.b2:.17g}\n"
            )
        stream.write("E\n")
        for row in obs.values:
            stream.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    finally:
        if owned:
            stream.close()


def write_grid_csv(grid: OccupationGrid, dest: Source) -> None:
    """Write a grid as CSV: header of y1 cell centers, leading column of y2 centers."""
    stream, owned = _open_out(dest)
    try:
        x_centers = grid.x_centers()
        y_centers = grid.y_centers()
        stream.write("," + ",".join(f"{x:.17g}" for x in x_centers) + "\n")
        for q, y in enumerate(y_centers):
            row = ",".join(f"{grid.values[p, q]:.17g}" for p in range(grid.nx))
            stream.write(f"{y:.17g},{row}\n")
    finally:
        if owned:
            stream.close()


def write_strips_csv(
    edges: Iterable[float], strips: Iterable[float], dest: Source
) -> None:
    """Write strip occupation times as CSV columns (x_lo, x_hi, occupation)."""
    edges = list(edges)
    strips = list(strips)
    if len(edges) != len(strips) + 1:
        raise ValueError(
            f"expected {len(strips) + 1} edges for {len(strips)} strips, got {len(edges)}"
        )
    stream, owned = _open_out(dest)
    try:
        stream.write("x_lo,x_hi,occupation\n")
        for lo, hi, value in zip(edges[:-1], edges[1:], strips):
            stream.write(f"{lo:.17g},{hi:.17g},{value:.17g}\n")
    finally:
        if owned:
            stream.close()
