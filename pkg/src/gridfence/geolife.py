"""Loader and study-region preprocessing for the GeoLife GPS corpus.

GeoLife ships as ``Data/<user>/Trajectory/*.plt`` files holding raw
latitude/longitude fixes. The workflow here mirrors the rest of the
pipeline: load a coarse box around the study landmark, project to local
planar meters, clip to a radius, and drop sparse users.

The landmark used throughout is the Working People's Cultural Palace in
central Beijing (WCP). Loading is box-limited around it so the planar
projection is anchored near the region of interest, which keeps the local
equirectangular approximation at centimeter-level error for the distances
involved.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .ingest import (
    EARTH_RADIUS_M,
    ParseError,
    Trajectory,
    TrajectorySet,
    filter_min_points,
    filter_region,
    latlon_to_planar,
)

WCP_LATLON = (39.908740372, 116.393679986)

# degrees of latitude/longitude kept around the landmark at load time;
# ~2 km, several times the 500 m study radius, so the box never excludes
# a point the radius filter could keep
LOAD_BOX_DEG = 0.02

WCP_RADIUS_M = 500.0
WCP_MIN_POINTS = 100


def _user_dirs(root: Path) -> list[Path]:
    if (root / "Data").is_dir():
        root = root / "Data"
    dirs = sorted(p for p in root.iterdir() if (p / "Trajectory").is_dir())
    if not dirs:
        raise ParseError(f"no <user>/Trajectory folders under {root}")
    return dirs


def _load_plt(path: Path) -> np.ndarray:
    """One .plt file -> (n, 3) array of latitude, longitude, day-number."""
    try:
        return np.loadtxt(path, delimiter=",", skiprows=6,
                          usecols=(0, 1, 4), ndmin=2)
    except (ValueError, IndexError) as e:
        raise ParseError(f"{path}: {e}") from None


def load_geolife(
    root: str | Path,
    center: tuple[float, float] = WCP_LATLON,
    box_deg: float = LOAD_BOX_DEG,
) -> TrajectorySet:
    """Read every user's .plt fixes inside a lat/lon box around center.

    Returns a TrajectorySet in raw degrees (x = longitude, y = latitude),
    per-user points time-sorted. Users with no point inside the box are
    dropped. Timestamps are the .plt fractional day number converted to
    seconds.
    """
    lat0, lon0 = center
    out = []
    for user_dir in _user_dirs(Path(root)):
        chunks = []
        for plt in sorted((user_dir / "Trajectory").glob("*.plt")):
            arr = _load_plt(plt)
            if arr.shape[0] == 0:
                continue
            keep = (
                (np.abs(arr[:, 0] - lat0) <= box_deg)
                & (np.abs(arr[:, 1] - lon0) <= box_deg)
            )
            if keep.any():
                chunks.append(arr[keep])
        if not chunks:
            continue
        raw = np.concatenate(chunks)
        pts = np.column_stack([raw[:, 2] * 86400.0, raw[:, 1], raw[:, 0]])
        pts = pts[np.argsort(pts[:, 0], kind="stable")]
        out.append(Trajectory(user_dir.name, pts))
    if not out:
        raise ParseError(f"no points within {box_deg} deg of {center}")
    return TrajectorySet(tuple(out))


def prepare_wcp(
    data: TrajectorySet,
    radius_m: float = WCP_RADIUS_M,
    min_points: int = WCP_MIN_POINTS,
) -> tuple[TrajectorySet, tuple[float, float]]:
    """Project to planar meters, clip to the landmark radius, drop sparse users.

    Returns the filtered planar TrajectorySet and the landmark's coordinates
    in the same planar frame, ready to use as the solve POI.
    """
    planar, (lat0, lon0) = latlon_to_planar(data)
    kx = math.cos(math.radians(lat0)) * EARTH_RADIUS_M
    wcp = (
        math.radians(WCP_LATLON[1] - lon0) * kx,
        math.radians(WCP_LATLON[0] - lat0) * EARTH_RADIUS_M,
    )
    clipped = filter_region(planar, wcp, radius_m)
    return filter_min_points(clipped, min_points), wcp
