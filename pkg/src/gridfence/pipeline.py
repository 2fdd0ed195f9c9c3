"""Shared composition layer between the CLI and the HTTP service.

Keeps dataset preparation, model assembly, and solver dispatch in one place
so both entry points produce identical results for identical configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import IO

from .circular import (
    CircularGeofence,
    CircularParams,
    circular_objective,
    optimize_circular,
    optimize_cover_oriented,
    user_coverage,
)
from .ingest import (
    CellMatrix,
    PoiCell,
    TrajectorySet,
    discretize,
    filter_min_points,
    filter_region,
    latlon_to_planar,
    normalize,
    parse_trajectories,
    poi_to_cell,
)
from .model import AreaWindow, ModelFlags, Weights, build_model, evaluate
from .solvers import (
    AnnealSchedule,
    SolveResult,
    local_search,
    solve_anneal,
    solve_exact,
    solve_hierarchical,
)


@dataclass(frozen=True)
class IngestOptions:
    has_header: bool = False
    time_format: str = "seconds"
    latlon: bool = False
    region_center: tuple[float, float] | None = None
    region_radius: float | None = None
    min_points: int | None = None


def load_trajectories(stream: IO[str], opts: IngestOptions) -> TrajectorySet:
    """parse -> (lat/lon projection) -> (region filter) -> (min-points filter)."""
    data = parse_trajectories(stream, has_header=opts.has_header,
                              time_format=opts.time_format)
    if opts.latlon:
        data, _ = latlon_to_planar(data)
    if opts.region_center is not None or opts.region_radius is not None:
        if opts.region_center is None or opts.region_radius is None:
            raise ValueError("region filter needs both center and radius")
        data = filter_region(data, opts.region_center, opts.region_radius)
        if len(data) == 0:
            raise ValueError("no trajectories left inside the region")
    if opts.min_points is not None:
        data = filter_min_points(data, opts.min_points)
        if len(data) == 0:
            raise ValueError("no trajectories left after the min-points filter")
    return data


def prepare_grid(
    data: TrajectorySet, d: int, normalization: str = "peak"
) -> tuple[CellMatrix, TrajectorySet]:
    """Normalize and discretize; the grid keeps the source bbox for inverses."""
    norm, bbox = normalize(data)
    grid = discretize(norm, d, bbox=bbox, normalization=normalization)
    return grid, norm


def normalize_poi(
    poi: tuple[float, float], bbox: tuple[float, float, float, float]
) -> tuple[float, float]:
    xmin, ymin, xmax, ymax = bbox
    x, y = float(poi[0]), float(poi[1])
    if not (xmin <= x <= xmax and ymin <= y <= ymax):
        raise ValueError(f"poi {poi} outside data bbox {bbox}")
    return (x - xmin) / (xmax - xmin), (y - ymin) / (ymax - ymin)


def window_from_pct(n_cells: int, min_pct: float, max_pct: float) -> AreaWindow:
    """Percent-of-grid window; fractions in [0, 1], floored to whole cells."""
    if not 0.0 <= min_pct <= max_pct <= 1.0:
        raise ValueError("need 0 <= min_pct <= max_pct <= 1")
    return AreaWindow(int(min_pct * n_cells), int(max_pct * n_cells))


@dataclass(frozen=True)
class DiscreteConfig:
    """One discrete solve: grid level, POI, weights, window, solver choice."""

    d: int
    weights: Weights = Weights()
    window_pct: tuple[float, float] | None = None
    flags: ModelFlags = ModelFlags()
    solver: str = "anneal"
    seed: int = 0
    d_coarse: int | None = None
    sweeps: int | None = None
    restarts: int = 8
    polish: bool = True
    normalization: str = "peak"

    def __post_init__(self) -> None:
        if self.solver not in ("exact", "anneal", "hier"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.solver == "hier" and self.window_pct is None:
            raise ValueError("hierarchical solving requires a window")


def run_discrete(grid: CellMatrix, poi_cell: PoiCell, cfg: DiscreteConfig) -> SolveResult:
    """Build the model for a prepared grid and dispatch to the chosen solver.

    With polish=True (default), annealed solutions get a local-search pass;
    exact solutions are already optimal and skip it.
    """
    schedule = AnnealSchedule(sweeps=cfg.sweeps, restarts=cfg.restarts, seed=cfg.seed)
    if cfg.solver == "hier":
        d_coarse = cfg.d_coarse if cfg.d_coarse is not None else max(1, cfg.d - 2)
        result = solve_hierarchical(
            grid, poi_cell, cfg.weights, cfg.window_pct, d_coarse, cfg.d,
            flags=cfg.flags, schedule=schedule,
        )
        model = build_model(
            grid, poi_cell, cfg.weights,
            window_from_pct(grid.spec.L**2, *cfg.window_pct), cfg.flags,
        )
    else:
        window = (
            window_from_pct(grid.spec.L**2, *cfg.window_pct)
            if cfg.window_pct is not None
            else None
        )
        model = build_model(grid, poi_cell, cfg.weights, window, cfg.flags)
        if cfg.solver == "exact":
            return solve_exact(model)
        result = solve_anneal(model, schedule)
    if cfg.polish and cfg.solver == "anneal" and result.feasible:
        polished = local_search(result.x, model)
        breakdown = evaluate(model, polished)
        if breakdown["total"] < result.breakdown["total"]:
            result = replace(result, x=polished, breakdown=breakdown)
    return result


def solve_discrete_from_data(
    data: TrajectorySet, poi_source: tuple[float, float], cfg: DiscreteConfig
) -> tuple[SolveResult, CellMatrix, TrajectorySet]:
    grid, norm = prepare_grid(data, cfg.d, cfg.normalization)
    poi_cell = poi_to_cell(poi_source, grid.spec.bbox, cfg.d)
    return run_discrete(grid, poi_cell, cfg), grid, norm


@dataclass(frozen=True)
class CircularConfig:
    params: CircularParams = CircularParams()
    cover_oriented: bool = False
    r_star: float | None = None
    epsilon: float = 0.01

    def __post_init__(self) -> None:
        if self.cover_oriented and self.r_star is None:
            raise ValueError("cover-oriented mode requires r_star")


def run_circular(
    data_norm: TrajectorySet, poi_norm: tuple[float, float], cfg: CircularConfig
) -> tuple[CircularGeofence, float, float]:
    """Optimize a disk on normalized data; returns (geofence, objective, coverage)."""
    if cfg.cover_oriented:
        g = optimize_cover_oriented(data_norm, poi_norm, cfg.r_star, cfg.epsilon, cfg.params)
    else:
        g = optimize_circular(data_norm, poi_norm, cfg.params)
    return g, circular_objective(g, poi_norm, data_norm, cfg.params), user_coverage(g, data_norm)
