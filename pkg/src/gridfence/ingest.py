"""Trajectory ingestion: parsing, filtering, normalization, grid discretization.

The pipeline turns raw ``uid,t,x,y`` records into the L x L density matrix
consumed by the cell-selection model:

    parse -> (filter_region / filter_min_points) -> normalize -> discretize

All operations are pure transformations; nothing here holds mutable state.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

import numpy as np

EARTH_RADIUS_M = 6_371_000.0


class ParseError(ValueError):
    """Input rows could not be parsed into trajectories."""


class TrajectoryPoint(NamedTuple):
    """One GPS observation: timestamp in seconds plus planar x, y."""

    t: float
    x: float
    y: float


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered point sequence for a single user.

    ``points`` is an (n, 3) float array with columns t, x, y. Timestamps are
    non-decreasing, coordinates finite, and the sequence is never empty.
    """

    uid: str
    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be an (n, 3) array of t, x, y")
        if pts.shape[0] == 0:
            raise ValueError(f"trajectory {self.uid!r} is empty")
        if not np.all(np.isfinite(pts)):
            raise ValueError(f"trajectory {self.uid!r} has non-finite values")
        if np.any(np.diff(pts[:, 0]) < 0):
            raise ValueError(f"trajectory {self.uid!r} has decreasing timestamps")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def t(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 2]

    def __len__(self) -> int:
        return self.points.shape[0]

    def point(self, i: int) -> TrajectoryPoint:
        return TrajectoryPoint(*self.points[i])


@dataclass(frozen=True)
class TrajectorySet:
    """Collection of per-user trajectories with unique uids."""

    trajectories: tuple[Trajectory, ...]

    def __post_init__(self) -> None:
        trajs = tuple(self.trajectories)
        uids = [tr.uid for tr in trajs]
        if len(set(uids)) != len(uids):
            raise ValueError("duplicate uid in trajectory set")
        object.__setattr__(self, "trajectories", trajs)

    def __iter__(self) -> Iterator[Trajectory]:
        return iter(self.trajectories)

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def uids(self) -> tuple[str, ...]:
        return tuple(tr.uid for tr in self.trajectories)

    @property
    def n_points(self) -> int:
        return sum(len(tr) for tr in self.trajectories)

    @cached_property
    def _stacked(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.trajectories:
            return np.empty((0, 3)), np.empty(0, dtype=np.int64)
        pts = np.concatenate([tr.points for tr in self.trajectories])
        uidx = np.repeat(
            np.arange(len(self.trajectories)), [len(tr) for tr in self.trajectories]
        )
        return pts, uidx

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """All points as one (N, 3) array plus the per-point trajectory index."""
        return self._stacked


@dataclass(frozen=True)
class GridSpec:
    """Discretization level d (side length L = 2**d) over a source bounding box."""

    d: int
    bbox: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("discretization level d must be >= 1")
        xmin, ymin, xmax, ymax = (float(v) for v in self.bbox)
        if not (xmax > xmin and ymax > ymin):
            raise ValueError(f"degenerate bbox {self.bbox}")
        object.__setattr__(self, "bbox", (xmin, ymin, xmax, ymax))

    @property
    def L(self) -> int:
        return 2**self.d


@dataclass(frozen=True)
class CellMatrix:
    """L x L density matrix with entries in [0, 1].

    Row 0 corresponds to the minimum-y edge of the bounding box; column 0 to
    minimum x.
    """

    values: np.ndarray
    spec: GridSpec

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        L = self.spec.L
        if vals.shape != (L, L):
            raise ValueError(f"values must be {L}x{L}, got {vals.shape}")
        if vals.min(initial=0.0) < 0.0 or vals.max(initial=0.0) > 1.0:
            raise ValueError("cell values must lie in [0, 1]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


class PoiCell(NamedTuple):
    """Grid cell holding the point of interest."""

    row: int
    col: int


def _bin_index(v: np.ndarray | float, L: int) -> np.ndarray:
    """Half-open bins [k/L, (k+1)/L) on [0, 1], last bin closed at 1."""
    idx = np.floor(np.asarray(v, dtype=float) * L).astype(np.int64)
    return np.clip(idx, 0, L - 1)


def _parse_time(raw: str, time_format: str) -> float:
    if time_format == "seconds":
        return float(raw)
    return datetime.fromisoformat(raw.strip()).timestamp()


def parse_trajectories(
    stream: Iterable[str],
    has_header: bool = False,
    time_format: str = "seconds",
) -> TrajectorySet:
    """Parse ``uid,t,x,y`` CSV rows into a :class:`TrajectorySet`.

    Points are grouped by uid (order of first appearance) and sorted by
    timestamp within each group. Malformed rows abort the parse with a
    :class:`ParseError` that names each offending line.

    Parameters
    ----------
    stream:
        Iterable of text lines (an open file, stdin, io.StringIO, ...).
    has_header:
        Skip the first row when True.
    time_format:
        "seconds" for float seconds, "iso8601" for ISO timestamps.
    """
    if time_format not in ("seconds", "iso8601"):
        raise ValueError(f"unknown time_format {time_format!r}")
    groups: dict[str, list[tuple[float, float, float]]] = {}
    bad: list[str] = []
    for lineno, row in enumerate(csv.reader(stream), start=1):
        if has_header and lineno == 1:
            continue
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 4:
            bad.append(f"line {lineno}: expected 4 fields uid,t,x,y, got {len(row)}")
            continue
        uid = row[0].strip()
        try:
            t = _parse_time(row[1], time_format)
            x = float(row[2])
            y = float(row[3])
        except ValueError:
            bad.append(f"line {lineno}: non-numeric field in {row[1:]!r}")
            continue
        if not (math.isfinite(t) and math.isfinite(x) and math.isfinite(y)):
            bad.append(f"line {lineno}: non-finite value")
            continue
        groups.setdefault(uid, []).append((t, x, y))
    if bad:
        shown = "; ".join(bad[:5])
        extra = f" (+{len(bad) - 5} more)" if len(bad) > 5 else ""
        raise ParseError(f"{len(bad)} malformed row(s): {shown}{extra}")
    if not groups:
        raise ParseError("no trajectory rows left after filtering")
    trajs = []
    for uid, pts in groups.items():
        arr = np.array(pts, dtype=float)
        arr = arr[np.argsort(arr[:, 0], kind="stable")]
        trajs.append(Trajectory(uid, arr))
    return TrajectorySet(tuple(trajs))


def write_csv(data: TrajectorySet, stream) -> None:
    """Serialize to ``uid,t,x,y`` rows; float fields use repr for byte stability."""
    writer = csv.writer(stream, lineterminator="\n")
    for tr in data:
        for t, x, y in tr.points:
            writer.writerow([tr.uid, repr(float(t)), repr(float(x)), repr(float(y))])


def filter_region(
    data: TrajectorySet, center: tuple[float, float], radius: float
) -> TrajectorySet:
    """Keep points strictly inside the disk of ``radius`` around ``center``.

    Trajectories left empty are dropped.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    cx, cy = float(center[0]), float(center[1])
    r2 = radius * radius
    kept = []
    for tr in data:
        d2 = (tr.x - cx) ** 2 + (tr.y - cy) ** 2
        mask = d2 < r2
        if mask.any():
            kept.append(Trajectory(tr.uid, tr.points[mask]))
    return TrajectorySet(tuple(kept))


def filter_min_points(data: TrajectorySet, min_points: int) -> TrajectorySet:
    """Drop users contributing fewer than ``min_points`` points (inclusive keep)."""
    if min_points < 1:
        raise ValueError("min_points must be >= 1")
    return TrajectorySet(tuple(tr for tr in data if len(tr) >= min_points))


def normalize(data: TrajectorySet) -> tuple[TrajectorySet, tuple[float, float, float, float]]:
    """Affinely map each axis onto [0, 1]; returns the new set and source bbox.

    The per-axis minimum maps to exactly 0 and the maximum to exactly 1, so
    downstream binning can rely on the closed upper boundary rule.
    """
    if len(data) == 0:
        raise ValueError("cannot normalize an empty trajectory set")
    pts, _ = data.stacked()
    xmin, xmax = float(pts[:, 1].min()), float(pts[:, 1].max())
    ymin, ymax = float(pts[:, 2].min()), float(pts[:, 2].max())
    if xmax <= xmin:
        raise ValueError("zero extent on x axis")
    if ymax <= ymin:
        raise ValueError("zero extent on y axis")
    sx, sy = xmax - xmin, ymax - ymin
    out = []
    for tr in data:
        mapped = tr.points.copy()
        mapped[:, 1] = (mapped[:, 1] - xmin) / sx
        mapped[:, 2] = (mapped[:, 2] - ymin) / sy
        out.append(Trajectory(tr.uid, mapped))
    return TrajectorySet(tuple(out)), (xmin, ymin, xmax, ymax)


def user_cell_counts(data: TrajectorySet, d: int) -> np.ndarray:
    """Raw unique-user counts per cell for normalized data.

    Each user contributes at most 1 to any cell, however many of their points
    fall inside it.
    """
    if d < 1:
        raise ValueError("discretization level d must be >= 1")
    L = 2**d
    counts = np.zeros((L, L), dtype=np.int64)
    for tr in data:
        if tr.x.min() < 0 or tr.x.max() > 1 or tr.y.min() < 0 or tr.y.max() > 1:
            raise ValueError(
                f"trajectory {tr.uid!r} has coordinates outside [0, 1]; normalize first"
            )
        rows = _bin_index(tr.y, L)
        cols = _bin_index(tr.x, L)
        occupied = np.unique(rows * L + cols)
        counts.flat[occupied] += 1
    return counts


def discretize(
    data: TrajectorySet,
    d: int,
    bbox: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0),
    normalization: str = "peak",
) -> CellMatrix:
    """Bin normalized trajectories into the L x L density matrix.

    Bins are half-open [k/L, (k+1)/L) with the last bin closed at 1; row index
    follows y (row 0 = minimum y), column index follows x. Unique-user counts
    are scaled to [0, 1] either by the peak cell count (default, peak density
    becomes exactly 1) or by the total user count (``normalization="total"``).
    """
    if normalization not in ("peak", "total"):
        raise ValueError(f"unknown normalization {normalization!r}")
    counts = user_cell_counts(data, d).astype(float)
    if normalization == "peak":
        peak = counts.max()
        values = counts / peak if peak > 0 else counts
    else:
        values = counts / len(data) if len(data) > 0 else counts
    return CellMatrix(values, GridSpec(d, bbox))


def poi_to_cell(
    poi: tuple[float, float], bbox: tuple[float, float, float, float], d: int
) -> PoiCell:
    """Map a source-unit POI into its grid cell using the discretize binning."""
    spec = GridSpec(d, bbox)
    xmin, ymin, xmax, ymax = spec.bbox
    x, y = float(poi[0]), float(poi[1])
    if not (xmin <= x <= xmax and ymin <= y <= ymax):
        raise ValueError(f"poi {poi} outside bbox {spec.bbox}")
    xn = (x - xmin) / (xmax - xmin)
    yn = (y - ymin) / (ymax - ymin)
    L = spec.L
    return PoiCell(int(_bin_index(yn, L)), int(_bin_index(xn, L)))


def latlon_to_planar(data: TrajectorySet) -> tuple[TrajectorySet, tuple[float, float]]:
    """Project lon/lat degrees (x=longitude, y=latitude) to local planar meters.

    Equirectangular approximation anchored at the data centroid; error stays
    at the meter level for city-scale extents. Returns the projected set and
    the (lat0, lon0) anchor.
    """
    if len(data) == 0:
        raise ValueError("cannot project an empty trajectory set")
    pts, _ = data.stacked()
    lon0 = float(pts[:, 1].mean())
    lat0 = float(pts[:, 2].mean())
    kx = math.cos(math.radians(lat0)) * EARTH_RADIUS_M
    out = []
    for tr in data:
        mapped = tr.points.copy()
        mapped[:, 1] = np.radians(mapped[:, 1] - lon0) * kx
        mapped[:, 2] = np.radians(mapped[:, 2] - lat0) * EARTH_RADIUS_M
        out.append(Trajectory(tr.uid, mapped))
    return TrajectorySet(tuple(out)), (lat0, lon0)
