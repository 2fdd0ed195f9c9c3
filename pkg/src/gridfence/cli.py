"""Command-line entry point.

Subcommands compose the library: ingest, synth, solve-circular,
solve-discrete, eval, compare, export, serve. Results print as canonical
JSON on stdout (so reruns with the same seed are byte-identical); failures
print a machine-readable JSON object on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager

from . import __version__
from .circular import CircularParams
from .geojson_export import export_geojson
from .ingest import ParseError, poi_to_cell, write_csv
from .model import ModelFlags, Weights
from .pipeline import (
    CircularConfig,
    DiscreteConfig,
    IngestOptions,
    load_trajectories,
    normalize_poi,
    prepare_grid,
    run_circular,
    run_discrete,
)
from .serialize import (
    canonical_json,
    circular_result_to_dict,
    coverage_report_to_dict,
    geofence_from_dict,
    grid_to_dict,
    solve_result_to_dict,
)
from .solvers import SolverError


def _parse_pair(text: str, what: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"{what} must be 'X,Y', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"{what}: {e}") from None


def _poi(text: str) -> tuple[float, float]:
    return _parse_pair(text, "--poi")


def _center(text: str) -> tuple[float, float]:
    return _parse_pair(text, "--region-center")


def _cell(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"cell must be 'ROW,COL', got {text!r}")
    return int(parts[0]), int(parts[1])


def _add_ingest_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", default="-", help="input CSV path, or - for stdin")
    p.add_argument("--has-header", action="store_true", help="skip the first CSV row")
    p.add_argument("--time-format", choices=("seconds", "iso8601"), default="seconds")
    p.add_argument("--latlon", action="store_true",
                   help="treat x,y as lon,lat degrees and project to local meters")
    p.add_argument("--region-center", type=_center, default=None, metavar="X,Y")
    p.add_argument("--region-radius", type=float, default=None, metavar="R")
    p.add_argument("--min-points", type=int, default=None, metavar="N")


def _ingest_options(args: argparse.Namespace) -> IngestOptions:
    return IngestOptions(
        has_header=args.has_header,
        time_format=args.time_format,
        latlon=args.latlon,
        region_center=args.region_center,
        region_radius=args.region_radius,
        min_points=args.min_points,
    )


@contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", newline="") as f:
            yield f


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as f:
            yield f


def _load(args: argparse.Namespace):
    with _open_in(args.data) as f:
        return load_trajectories(f, _ingest_options(args))


def _cmd_ingest(args: argparse.Namespace) -> int:
    data = _load(args)
    with _open_out(args.out) as f:
        write_csv(data, f)
    print(f"{len(data)} users, {data.n_points} points", file=sys.stderr)
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    from .synth import PRESETS, SynthConfig, build_dataset

    if args.preset:
        cfg = PRESETS[args.preset]
    else:
        cfg = SynthConfig(n=args.n, thin_p=args.thin_p, m=args.m,
                          noise_std=args.noise, k_pois=args.pois, seed=args.seed)
    data, pois = build_dataset(cfg)
    with _open_out(args.out) as f:
        write_csv(data, f)
    if args.pois_out:
        with open(args.pois_out, "w") as f:
            f.write(canonical_json([[x, y] for x, y in pois]))
            f.write("\n")
    print(f"{len(data)} trajectories, POIs at {pois}", file=sys.stderr)
    return 0


def _cmd_solve_circular(args: argparse.Namespace) -> int:
    from .ingest import normalize

    data = _load(args)
    norm, bbox = normalize(data)
    poi_norm = normalize_poi(args.poi, bbox)
    params = CircularParams(
        cr_limit=args.cr_limit, mu=args.mu, seed=args.seed,
        population=args.population, generations=args.generations,
        negate_objective=args.negate_objective,
    )
    cfg = CircularConfig(params=params, cover_oriented=args.cover_oriented,
                         r_star=args.r_star, epsilon=args.epsilon)
    g, objective, coverage = run_circular(norm, poi_norm, cfg)
    print(canonical_json(circular_result_to_dict(g, objective, coverage)))
    return 0


def _cmd_solve_discrete(args: argparse.Namespace) -> int:
    data = _load(args)
    weights = Weights(a_area=args.a_area, a_cover=args.a_cover, a_2dw=args.a_2dw,
                      a_ng=args.a_ng, alpha=args.alpha, sigma=args.sigma)
    flags = ModelFlags(
        poi_hard=args.poi_hard,
        dw_directions=frozenset(args.dw_dirs.split(",")),
        forbidden_cells=frozenset(args.forbid or ()),
    )
    window_pct = None
    if args.area_max_pct is not None:
        window_pct = ((args.area_min_pct or 0.0) / 100.0, args.area_max_pct / 100.0)
    elif args.area_min_pct is not None:
        raise ValueError("--area-min-pct requires --area-max-pct")
    cfg = DiscreteConfig(
        d=args.d, weights=weights, window_pct=window_pct, flags=flags,
        solver=args.solver, seed=args.seed, d_coarse=args.d_coarse,
        sweeps=args.sweeps, restarts=args.restarts,
        normalization=args.normalization,
    )
    grid, norm = prepare_grid(data, cfg.d, cfg.normalization)
    poi_cell = poi_to_cell(args.poi, grid.spec.bbox, cfg.d)
    result = run_discrete(grid, poi_cell, cfg)
    if args.grid_out:
        with open(args.grid_out, "w") as f:
            f.write(canonical_json(grid_to_dict(grid)))
            f.write("\n")
    if args.geojson:
        with open(args.geojson, "w") as f:
            f.write(canonical_json(export_geojson(result)))
            f.write("\n")
    print(canonical_json(solve_result_to_dict(result)))
    print(f"solved in {result.wall_time:.3f}s ({result.solver_id})", file=sys.stderr)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    from .evaluation import coverage_report
    from .ingest import normalize

    with open(args.geofence) as f:
        geofence = geofence_from_dict(json.load(f))
    data = _load(args)
    norm, _ = normalize(data)
    report = coverage_report(geofence, norm)
    print(canonical_json(coverage_report_to_dict(report)))
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    from .evaluation import compare_report
    from .ingest import normalize
    from .serialize import coverage_report_to_dict as report_dict

    circ, disc = [], []
    for path in args.circular or ():
        with open(path) as f:
            circ.append(geofence_from_dict(json.load(f)))
    for path in args.discrete or ():
        with open(path) as f:
            disc.append(geofence_from_dict(json.load(f)))
    data = _load(args)
    norm, _ = normalize(data)
    rep = compare_report(circ, disc, norm)
    print("uid,circular,discrete")
    for row in rep["scatter"]:
        print(f"{row['uid']},{row['circular']!r},{row['discrete']!r}")
    if args.report_out:
        doc = {
            "circular": [report_dict(r) for r in rep["circular"]],
            "discrete": [report_dict(r) for r in rep["discrete"]],
            "scatter": rep["scatter"],
        }
        with open(args.report_out, "w") as f:
            f.write(canonical_json(doc))
            f.write("\n")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    with open(args.result) as f:
        doc = json.load(f)
    geofence = geofence_from_dict(doc)
    bbox = tuple(args.bbox) if args.bbox else None
    out = export_geojson(geofence, bbox=bbox)
    with _open_out(args.out) as f:
        f.write(canonical_json(out))
        f.write("\n")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridfence",
                                description="Grid-cell geofence design toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="parse, filter, and re-emit trajectory CSV")
    _add_ingest_args(sp)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=_cmd_ingest)

    sp = sub.add_parser("synth", help="generate a synthetic dataset")
    sp.add_argument("--preset", choices=("data1", "data2"))
    sp.add_argument("--n", type=int, default=9)
    sp.add_argument("--thin-p", type=float, default=0.3)
    sp.add_argument("--m", type=int, default=60)
    sp.add_argument("--noise", type=float, default=0.01)
    sp.add_argument("--pois", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="-")
    sp.add_argument("--pois-out")
    sp.set_defaults(func=_cmd_synth)

    sp = sub.add_parser("solve-circular", help="optimize the circular baseline")
    _add_ingest_args(sp)
    sp.add_argument("--poi", type=_poi, required=True, metavar="X,Y",
                    help="point of interest in source units")
    sp.add_argument("--cr-limit", type=float, default=0.5)
    sp.add_argument("--mu", type=float, default=10.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--population", type=int, default=64)
    sp.add_argument("--generations", type=int, default=300)
    sp.add_argument("--negate-objective", action="store_true")
    sp.add_argument("--cover-oriented", action="store_true")
    sp.add_argument("--r-star", type=float)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.set_defaults(func=_cmd_solve_circular)

    sp = sub.add_parser("solve-discrete", help="build and solve the cell-selection model")
    _add_ingest_args(sp)
    sp.add_argument("--d", type=int, required=True, help="discretization level; L = 2^d")
    sp.add_argument("--poi", type=_poi, required=True, metavar="X,Y",
                    help="point of interest in source units")
    sp.add_argument("--a-area", type=float, default=1.0)
    sp.add_argument("--a-cover", type=float, default=60.0)
    sp.add_argument("--a-2dw", type=float, default=1.0)
    sp.add_argument("--a-ng", type=float, default=1.0)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--area-min-pct", type=float, default=None,
                    help="window lower bound, percent of all cells")
    sp.add_argument("--area-max-pct", type=float, default=None,
                    help="window upper bound, percent of all cells")
    sp.add_argument("--poi-hard", action="store_true")
    sp.add_argument("--dw-dirs", default="RD,LU")
    sp.add_argument("--forbid", type=_cell, action="append", metavar="ROW,COL")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--solver", choices=("exact", "anneal", "hier"), default="anneal")
    sp.add_argument("--d-coarse", type=int, default=None)
    sp.add_argument("--sweeps", type=int, default=None)
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--normalization", choices=("peak", "total"), default="peak")
    sp.add_argument("--geojson", help="also write the selection as GeoJSON here")
    sp.add_argument("--grid-out", help="also write the density grid JSON here")
    sp.set_defaults(func=_cmd_solve_discrete)

    sp = sub.add_parser("eval", help="coverage metrics for a saved geofence")
    _add_ingest_args(sp)
    sp.add_argument("--geofence", required=True, help="SolveResult or circular JSON")
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("compare", help="per-user circular vs discrete scatter CSV")
    _add_ingest_args(sp)
    sp.add_argument("--circular", action="append", required=True)
    sp.add_argument("--discrete", action="append", required=True)
    sp.add_argument("--report-out")
    sp.set_defaults(func=_cmd_compare)

    sp = sub.add_parser("export", help="convert a saved result to GeoJSON")
    sp.add_argument("--result", required=True)
    sp.add_argument("--bbox", type=float, nargs=4, metavar=("XMIN", "YMIN", "XMAX", "YMAX"))
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=_cmd_export)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8787)
    sp.add_argument("--state-dir", default=None,
                    help="run persistence directory (env: GRIDFENCE_STATE_DIR)")
    sp.set_defaults(func=_cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ParseError, SolverError, OSError) as e:
        print(json.dumps({"error": str(e), "type": type(e).__name__}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
