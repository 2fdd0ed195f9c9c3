"""Coverage and overlap metrics for circular and discrete geofences.

Two user-averaged scores: UCR is the fraction of users with at least one
covered point; UPCR averages each user's covered-point fraction (reported
with its population standard deviation). Circular membership is strictly
inside the radius; discrete membership is cell membership under the same
binning rule the density grid uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circular import CircularGeofence
from .ingest import Trajectory, TrajectorySet, _bin_index
from .model import DiscreteGeofence

Geofence = CircularGeofence | DiscreteGeofence


def _covered(geofence: Geofence, tr: Trajectory) -> np.ndarray:
    if isinstance(geofence, CircularGeofence):
        d2 = (tr.x - geofence.cx) ** 2 + (tr.y - geofence.cy) ** 2
        return d2 < geofence.r * geofence.r
    L = geofence.spec.L
    rows = _bin_index(tr.y, L)
    cols = _bin_index(tr.x, L)
    return geofence.x[rows, cols] == 1


def point_inside(geofence: Geofence, point: tuple[float, float]) -> bool:
    """Membership test for one normalized (x, y) point."""
    if isinstance(geofence, CircularGeofence):
        dx, dy = point[0] - geofence.cx, point[1] - geofence.cy
        return bool(dx * dx + dy * dy < geofence.r * geofence.r)
    L = geofence.spec.L
    r = int(_bin_index(np.float64(point[1]), L))
    c = int(_bin_index(np.float64(point[0]), L))
    return bool(geofence.x[r, c] == 1)


def ucr(geofence: Geofence, data: TrajectorySet) -> float:
    """Fraction of users with >= 1 covered point."""
    if len(data) == 0:
        raise ValueError("UCR undefined for an empty trajectory set")
    hit = sum(1 for tr in data if _covered(geofence, tr).any())
    return hit / len(data)


def upcr(geofence: Geofence, data: TrajectorySet) -> tuple[float, float, list[tuple[str, float]]]:
    """Per-user covered-point fractions: (mean, population std, per-user list)."""
    if len(data) == 0:
        raise ValueError("UPCR undefined for an empty trajectory set")
    per_user = [(tr.uid, float(_covered(geofence, tr).mean())) for tr in data]
    fr = np.array([f for _, f in per_user])
    return float(fr.mean()), float(fr.std()), per_user


@dataclass(frozen=True)
class CoverageReport:
    ucr: float
    upcr_mean: float
    upcr_std: float
    per_user: tuple[tuple[str, float], ...]
    geofence_kind: str

    def __post_init__(self) -> None:
        for name in ("ucr", "upcr_mean", "upcr_std"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        object.__setattr__(self, "per_user", tuple(self.per_user))


def coverage_report(geofence: Geofence, data: TrajectorySet) -> CoverageReport:
    mean, std, per_user = upcr(geofence, data)
    kind = "circular" if isinstance(geofence, CircularGeofence) else "discrete"
    return CoverageReport(
        ucr=ucr(geofence, data),
        upcr_mean=mean,
        upcr_std=std,
        per_user=tuple(per_user),
        geofence_kind=kind,
    )


def overlap(x1: DiscreteGeofence, x2: DiscreteGeofence) -> dict:
    """Shared-cell count and Jaccard index of two selections on one grid."""
    if x1.spec != x2.spec:
        raise ValueError(f"grid specs differ: {x1.spec} vs {x2.spec}")
    inter = int(np.logical_and(x1.x, x2.x).sum())
    union = int(np.logical_or(x1.x, x2.x).sum())
    return {
        "intersection_cells": inter,
        "jaccard": inter / union if union else 0.0,
    }


def compare_report(
    circular_list: list[CircularGeofence],
    discrete_list: list[DiscreteGeofence],
    data: TrajectorySet,
) -> dict:
    """UCR/UPCR per geofence plus one scatter pair per user.

    Scatter pairs take the first geofence of each list: x is the user's
    covered fraction under the circular design, y under the discrete one.
    """
    if not circular_list or not discrete_list:
        raise ValueError("need at least one geofence of each kind")
    circ = [coverage_report(g, data) for g in circular_list]
    disc = [coverage_report(g, data) for g in discrete_list]
    cfrac = dict(circ[0].per_user)
    dfrac = dict(disc[0].per_user)
    scatter = [
        {"uid": uid, "circular": cfrac[uid], "discrete": dfrac[uid]}
        for uid in data.uids
    ]
    return {"circular": circ, "discrete": disc, "scatter": scatter}
