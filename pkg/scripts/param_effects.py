"""How each objective weight shapes the returned selection.

Sweeps one weight while the others stay at their defaults and reports the
solution's size, raw term values, and coverage. Useful for picking weights
on an unfamiliar dataset: raise a_cover until coverage saturates, raise
a_2dw / a_ng if the selection fragments.
"""
import argparse

from gridfence.evaluation import coverage_report
from gridfence.ingest import poi_to_cell
from gridfence.model import Weights, build_model
from gridfence.pipeline import prepare_grid, window_from_pct
from gridfence.solvers import AnnealSchedule, solve_anneal
from gridfence.synth import preset

SWEEPABLE = ("a_area", "a_cover", "a_2dw", "a_ng", "alpha", "sigma")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="data1", choices=("data1", "data2"))
    ap.add_argument("--poi-index", type=int, default=1)
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--param", default="a_cover", choices=SWEEPABLE)
    ap.add_argument("--values", type=float, nargs="+",
                    default=[1, 5, 15, 30, 60, 120])
    ap.add_argument("--window", type=float, nargs=2, default=None,
                    metavar=("MIN_PCT", "MAX_PCT"),
                    help="omit to solve unwindowed (area term active)")
    args = ap.parse_args()

    data, pois = preset(args.preset)
    grid, norm = prepare_grid(data, args.d)
    poi = poi_to_cell(pois[args.poi_index], grid.spec.bbox, args.d)
    window = None
    if args.window:
        window = window_from_pct(grid.spec.L ** 2,
                                 args.window[0] / 100, args.window[1] / 100)

    print(f"sweeping {args.param}; window={window}")
    print(f"{args.param:>8} {'cells':>5} {'cover':>9} {'dw':>7} {'ng':>7} "
          f"{'ucr':>6} {'upcr':>6}")
    for v in args.values:
        weights = Weights(**{args.param: v})
        model = build_model(grid, poi, weights, window)
        res = solve_anneal(model, AnnealSchedule(seed=args.seed))
        rep = coverage_report(res.x, norm)
        b = res.breakdown
        print(f"{v:8.2f} {int(res.x.x.sum()):5d} {b['cover']:9.3f} "
              f"{b['dw']:7.2f} {b['ng']:7.2f} {rep.ucr:6.3f} "
              f"{rep.upcr_mean:6.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
