"""Canonical JSON serialization shared by the CLI and the HTTP service.

Byte determinism contract: the same solve configuration and seed must print
the same bytes everywhere. That means sorted keys, compact separators, plain
Python scalars (numpy types cast before dumping), NaN mapped to null, and no
wall-clock fields in the canonical form (timing goes to diagnostics instead).
"""

from __future__ import annotations

import json
import math
from typing import Any

from .circular import CircularGeofence
from .evaluation import CoverageReport
from .ingest import CellMatrix, GridSpec
from .model import DiscreteGeofence
from .solvers import SolveResult


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _clean_float(v: float) -> float | None:
    v = float(v)
    return None if math.isnan(v) else v


def spec_to_dict(spec: GridSpec) -> dict:
    return {"d": spec.d, "bbox": [float(b) for b in spec.bbox]}


def grid_to_dict(grid: CellMatrix) -> dict:
    return {
        "d": grid.spec.d,
        "L": grid.spec.L,
        "bbox": [float(b) for b in grid.spec.bbox],
        "values": [[float(v) for v in row] for row in grid.values],
    }


def solve_result_to_dict(result: SolveResult) -> dict:
    """Canonical SolveResult payload. wall_time is deliberately excluded."""
    return {
        "x": [[int(v) for v in row] for row in result.x.x],
        "spec": spec_to_dict(result.x.spec),
        "breakdown": {k: _clean_float(v) for k, v in result.breakdown.items()},
        "feasible": bool(result.feasible),
        "solver_id": result.solver_id,
        "seed": None if result.seed is None else int(result.seed),
    }


def circular_result_to_dict(
    g: CircularGeofence, objective: float, coverage: float
) -> dict:
    return {
        "cx": float(g.cx),
        "cy": float(g.cy),
        "r": float(g.r),
        "objective": float(objective),
        "coverage": float(coverage),
    }


def coverage_report_to_dict(report: CoverageReport) -> dict:
    return {
        "ucr": float(report.ucr),
        "upcr_mean": float(report.upcr_mean),
        "upcr_std": float(report.upcr_std),
        "per_user": [{"uid": uid, "fraction": float(f)} for uid, f in report.per_user],
        "geofence_kind": report.geofence_kind,
    }


def geofence_from_dict(doc: dict):
    """Load a geofence from an eval-input JSON document.

    Accepts a canonical SolveResult payload (x + spec), a bare discrete
    {x, spec} pair, or a circular {cx, cy, r} triplet.
    """
    import numpy as np

    if "x" in doc and "spec" in doc:
        spec = GridSpec(int(doc["spec"]["d"]), tuple(doc["spec"]["bbox"]))
        return DiscreteGeofence(np.asarray(doc["x"], dtype=np.int8), spec)
    if {"cx", "cy", "r"} <= set(doc):
        return CircularGeofence(float(doc["cx"]), float(doc["cy"]), float(doc["r"]))
    raise ValueError("document is neither a discrete nor a circular geofence")
