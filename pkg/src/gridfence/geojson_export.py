"""GeoJSON export: selected cells as rectangles, disks as 64-gons.

Geometry is emitted in source units by inverting the normalization affine
map, so exported documents line up with the original coordinate frame.
"""

from __future__ import annotations

import math

import numpy as np

from .circular import CircularGeofence
from .model import DiscreteGeofence

CIRCLE_SEGMENTS = 64


def _affine(bbox: tuple[float, float, float, float]):
    xmin, ymin, xmax, ymax = bbox
    w, h = xmax - xmin, ymax - ymin

    def to_source(xn: float, yn: float) -> list[float]:
        return [xmin + xn * w, ymin + yn * h]

    return to_source


def export_geojson(
    obj,
    bbox: tuple[float, float, float, float] | None = None,
    properties: dict | None = None,
) -> dict:
    """FeatureCollection for a geofence (or a SolveResult wrapping one).

    Discrete selections become one feature with a MultiPolygon of axis-
    aligned cell rectangles; circular geofences become a 64-gon ring. An
    explicit bbox must match the geofence's own spec when it carries one.
    """
    props = dict(properties or {})
    geofence = obj
    if hasattr(obj, "x") and hasattr(obj, "solver_id"):  # SolveResult
        geofence = obj.x
        props.setdefault("solver_id", obj.solver_id)
        props.setdefault("seed", obj.seed)
        props.setdefault("feasible", obj.feasible)
        props.setdefault("objective", obj.breakdown.get("total"))

    if isinstance(geofence, DiscreteGeofence):
        spec_bbox = geofence.spec.bbox
        if bbox is not None and tuple(float(v) for v in bbox) != spec_bbox:
            raise ValueError(f"bbox {bbox} does not match the grid's {spec_bbox}")
        to_src = _affine(spec_bbox)
        L = geofence.spec.L
        polys = []
        for r, c in geofence.cells():
            x0, y0 = c / L, r / L
            x1, y1 = (c + 1) / L, (r + 1) / L
            ring = [
                to_src(x0, y0),
                to_src(x1, y0),
                to_src(x1, y1),
                to_src(x0, y1),
                to_src(x0, y0),
            ]
            polys.append([ring])
        features = []
        if polys:
            features.append(
                {
                    "type": "Feature",
                    "geometry": {"type": "MultiPolygon", "coordinates": polys},
                    "properties": {**props, "kind": "discrete", "n_cells": len(polys)},
                }
            )
        return {"type": "FeatureCollection", "features": features}

    if isinstance(geofence, CircularGeofence):
        to_src = _affine(bbox if bbox is not None else (0.0, 0.0, 1.0, 1.0))
        ring = []
        for k in range(CIRCLE_SEGMENTS + 1):
            th = 2.0 * math.pi * (k % CIRCLE_SEGMENTS) / CIRCLE_SEGMENTS
            ring.append(
                to_src(geofence.cx + geofence.r * math.cos(th),
                       geofence.cy + geofence.r * math.sin(th))
            )
        feature = {
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {**props, "kind": "circular", "r": geofence.r},
        }
        return {"type": "FeatureCollection", "features": [feature]}

    raise TypeError(f"cannot export {type(obj).__name__}")


def rebin_cell_centroids(doc: dict, spec_bbox, L: int) -> set[tuple[int, int]]:
    """Recover the selected cell set from an exported document's rectangles.

    Inverse check used by tests and sanity tooling: average each rectangle
    ring's corners, normalize, and bin like the density grid does.
    """
    xmin, ymin, xmax, ymax = spec_bbox
    cells: set[tuple[int, int]] = set()
    for feat in doc["features"]:
        geom = feat["geometry"]
        if geom["type"] != "MultiPolygon":
            continue
        for poly in geom["coordinates"]:
            ring = np.asarray(poly[0][:4])
            cx, cy = ring[:, 0].mean(), ring[:, 1].mean()
            xn = (cx - xmin) / (xmax - xmin)
            yn = (cy - ymin) / (ymax - ymin)
            cells.add((int(min(yn * L, L - 1)), int(min(xn * L, L - 1))))
    return cells
