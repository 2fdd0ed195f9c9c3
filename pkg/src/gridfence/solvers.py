"""Solvers for compiled cell-selection models.

solve_exact enumerates every assignment of the free variables (bounded at 22,
about 4M states) and is the in-repo optimality oracle. solve_anneal runs
restarted simulated annealing with the area window softened to a quadratic
penalty, then repairs any residual violation. repair and local_search are the
feasibility / polish passes, and solve_hierarchical wires the coarse-to-fine
strategy on top of the other solvers.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .ingest import CellMatrix, GridSpec, PoiCell
from .model import (
    AreaWindow,
    DiscreteGeofence,
    ModelFlags,
    QuadraticModel,
    Weights,
    build_model,
    check_fixed,
    evaluate,
    window_violation,
)

EXACT_MAX_FREE = 22
_ENUM_CHUNK = 1 << 20
_ANNEAL_CHUNK = 1 << 22


class SolverError(RuntimeError):
    pass


class InfeasibleModelError(SolverError):
    """Window and fixed assignments admit no feasible selection."""


class ExactSizeError(SolverError):
    """Too many free variables for exhaustive enumeration."""


@dataclass(frozen=True)
class AnnealSchedule:
    """Annealing budget. sweeps counts total attempted single-bit flips.

    Defaults (filled per model when left None): sweeps = 2000 * free
    variables, t_start = largest |coefficient|. Restarts draw independent
    sub-seeds from `seed`, so the result is reproducible regardless of how
    restarts are scheduled.
    """

    sweeps: int | None = None
    t_start: float | None = None
    t_end: float = 1e-3
    restarts: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sweeps is not None and self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.t_end <= 0:
            raise ValueError("t_end must be > 0")
        if self.t_start is not None and self.t_start < self.t_end:
            raise ValueError("need t_start >= t_end")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    x: DiscreteGeofence
    breakdown: dict
    feasible: bool
    wall_time: float
    solver_id: str
    seed: int | None


@dataclass(frozen=True)
class _Reduced:
    """Model with fixed variables folded out.

    free lists the surviving flat indices (ascending). pa/pb/pw hold the
    couplings between free variables, indexed into `free`. lo/hi are the
    window bounds translated to free-popcount space (unbounded models get
    [0, k]); n_fixed1 counts fixed-on cells.
    """

    free: np.ndarray
    h: np.ndarray
    const: float
    pa: np.ndarray
    pb: np.ndarray
    pw: np.ndarray
    n_fixed1: int
    lo: int
    hi: int
    has_window: bool

    @property
    def k(self) -> int:
        return self.free.size


def _reduce(model: QuadraticModel) -> _Reduced:
    fixed = model.fixed
    free = np.array([i for i in range(model.n) if i not in fixed], dtype=np.int64)
    pos = {int(i): p for p, i in enumerate(free)}
    h = model.linear[free].copy()
    const = model.constant
    for i, v in fixed.items():
        const += model.linear[i] * v
    pa, pb, pw = [], [], []
    for (a, b), w in sorted(model.pairwise.items()):
        fa, fb = a in fixed, b in fixed
        if fa and fb:
            const += w * fixed[a] * fixed[b]
        elif fa:
            h[pos[b]] += w * fixed[a]
        elif fb:
            h[pos[a]] += w * fixed[b]
        else:
            pa.append(pos[a])
            pb.append(pos[b])
            pw.append(w)
    n_fixed1 = sum(fixed.values())
    if model.window is not None:
        lo = model.window.min_cells - n_fixed1
        hi = model.window.max_cells - n_fixed1
    else:
        lo, hi = 0, free.size
    return _Reduced(
        free=free,
        h=h,
        const=const,
        pa=np.array(pa, dtype=np.int64),
        pb=np.array(pb, dtype=np.int64),
        pw=np.array(pw, dtype=float),
        n_fixed1=n_fixed1,
        lo=lo,
        hi=hi,
        has_window=model.window is not None,
    )


def _check_reachable(rd: _Reduced) -> None:
    if rd.hi < 0 or rd.lo > rd.k:
        raise InfeasibleModelError(
            f"window unreachable: free popcount range [{max(rd.lo, 0)}, {min(rd.hi, rd.k)}]"
        )


def _full_state(model: QuadraticModel, rd: _Reduced, bits: np.ndarray) -> np.ndarray:
    x = np.zeros(model.n, dtype=np.int8)
    for i, v in model.fixed.items():
        x[i] = v
    x[rd.free] = bits
    return x


def _free_gains(rd: _Reduced, bits: np.ndarray) -> np.ndarray:
    g = rd.h.copy()
    if rd.pw.size:
        np.add.at(g, rd.pa, rd.pw * bits[rd.pb])
        np.add.at(g, rd.pb, rd.pw * bits[rd.pa])
    return g


def _free_energy(rd: _Reduced, bits: np.ndarray) -> float:
    e = float(rd.h @ bits)
    if rd.pw.size:
        e += float((rd.pw * bits[rd.pa] * bits[rd.pb]).sum())
    return e


def _finish(model: QuadraticModel, x_flat: np.ndarray, solver_id: str,
            seed: int | None, t0: float) -> SolveResult:
    X = DiscreteGeofence(x_flat.reshape(model.spec.L, model.spec.L), model.spec)
    breakdown = evaluate(model, X)
    feasible = check_fixed(model, X.x) and window_violation(model, X.x) == 0
    return SolveResult(
        x=X,
        breakdown=breakdown,
        feasible=feasible,
        wall_time=time.perf_counter() - t0,
        solver_id=solver_id,
        seed=seed,
    )


def solve_exact(model: QuadraticModel) -> SolveResult:
    """Global minimum by exhaustive enumeration of the free variables.

    Ties are broken toward the lexicographically smallest full bit pattern
    (row-major). States are enumerated most-significant-bit-first over
    ascending flat indices, so numeric order is lexicographic order and the
    first minimum wins.
    """
    t0 = time.perf_counter()
    rd = _reduce(model)
    if rd.k > EXACT_MAX_FREE:
        raise ExactSizeError(
            f"{rd.k} free variables exceed the enumeration bound {EXACT_MAX_FREE}"
        )
    _check_reachable(rd)
    if rd.k == 0:
        return _finish(model, _full_state(model, rd, np.zeros(0, dtype=np.int8)),
                       "exact", None, t0)
    shifts = np.arange(rd.k - 1, -1, -1, dtype=np.uint32)
    best_e = np.inf
    best_bits: np.ndarray | None = None
    total = 1 << rd.k
    for start in range(0, total, _ENUM_CHUNK):
        states = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.uint32)
        bits = ((states[:, None] >> shifts[None, :]) & 1).astype(np.int8)
        e = bits.astype(float) @ rd.h
        for a, b, w in zip(rd.pa, rd.pb, rd.pw):
            e += w * (bits[:, a] * bits[:, b])
        if rd.has_window:
            pc = bits.sum(axis=1)
            e[(pc < rd.lo) | (pc > rd.hi)] = np.inf
        i = int(np.argmin(e))
        if e[i] < best_e:
            best_e = float(e[i])
            best_bits = bits[i].copy()
    if best_bits is None or not np.isfinite(best_e):
        raise InfeasibleModelError("no feasible assignment under the window")
    return _finish(model, _full_state(model, rd, best_bits), "exact", None, t0)


def _default_t_start(rd: _Reduced, lam: float) -> float:
    cands = [lam]
    if rd.h.size:
        cands.append(float(np.abs(rd.h).max()))
    if rd.pw.size:
        cands.append(float(np.abs(rd.pw).max()))
    return max(max(cands), 1e-3)


def solve_anneal(model: QuadraticModel, schedule: AnnealSchedule | None = None) -> SolveResult:
    """Restarted Metropolis annealing with geometric cooling.

    The window is enforced during search by a one-sided quadratic penalty
    lam * violation^2 with lam above the largest |linear coefficient|, then
    any residual violation is closed by repair(). Best-of-restarts by
    objective, ties toward the lexicographically smaller selection.
    """
    from . import _kernels

    t0 = time.perf_counter()
    schedule = schedule or AnnealSchedule()
    rd = _reduce(model)
    _check_reachable(rd)
    k = rd.k
    if k == 0:
        return _finish(model, _full_state(model, rd, np.zeros(0, dtype=np.int8)),
                       "anneal", schedule.seed, t0)

    lam = (1.0 + 2.0 * float(np.abs(rd.h).max() if rd.h.size else 0.0)) if rd.has_window else 0.0
    t_start = schedule.t_start if schedule.t_start is not None else _default_t_start(rd, lam)
    t_start = max(t_start, schedule.t_end)
    steps = schedule.sweeps if schedule.sweeps is not None else 2000 * k
    log_ratio = np.log(schedule.t_end / t_start) if steps > 1 else 0.0

    # CSR over both directions of each coupling
    deg = np.zeros(k + 1, dtype=np.int64)
    for a, b in zip(rd.pa, rd.pb):
        deg[a + 1] += 1
        deg[b + 1] += 1
    nbr_start = np.cumsum(deg)
    nbr_idx = np.zeros(nbr_start[-1], dtype=np.int64)
    nbr_w = np.zeros(nbr_start[-1], dtype=float)
    cursor = nbr_start[:-1].copy()
    for a, b, w in zip(rd.pa, rd.pb, rd.pw):
        nbr_idx[cursor[a]] = b
        nbr_w[cursor[a]] = w
        cursor[a] += 1
        nbr_idx[cursor[b]] = a
        nbr_w[cursor[b]] = w
        cursor[b] += 1

    best_total: float | None = None
    best_x: np.ndarray | None = None
    children = np.random.SeedSequence(schedule.seed).spawn(schedule.restarts)
    for child in children:
        rng = np.random.default_rng(child)
        if rd.has_window:
            target = (max(rd.lo, 0) + min(rd.hi, k)) // 2
            bits = np.zeros(k, dtype=np.int8)
            bits[rng.permutation(k)[:target]] = 1
        else:
            bits = (rng.random(k) < 0.5).astype(np.int8)
        gains = _free_gains(rd, bits)
        pc = int(bits.sum())
        cur_e = _free_energy(rd, bits) + _kernels._window_penalty.py_func(pc, rd.lo, rd.hi, lam)
        run_best = bits.copy()
        best_e = cur_e
        done = 0
        while done < steps:
            span = min(_ANNEAL_CHUNK, steps - done)
            sites = rng.integers(0, k, size=span, dtype=np.int64)
            urand = rng.random(span)
            ks = np.arange(done, done + span, dtype=float)
            temps = (t_start * np.exp(log_ratio * ks / (steps - 1))
                     if steps > 1 else np.full(span, t_start))
            pc, cur_e, best_e = _kernels.anneal_chunk(
                bits, gains, nbr_start, nbr_idx, nbr_w, sites, urand, temps,
                lam, rd.lo, rd.hi, pc, cur_e, best_e, run_best, k,
            )
            done += span
        expect = _free_energy(rd, bits) + _kernels._window_penalty.py_func(pc, rd.lo, rd.hi, lam)
        if abs(cur_e - expect) > 1e-6 * max(1.0, abs(expect)):
            raise SolverError(
                f"incremental energy drifted: tracked {cur_e!r} vs recomputed {expect!r}"
            )
        if cur_e < best_e:
            run_best = bits
        x_flat = _full_state(model, rd, run_best)
        repaired = repair(x_flat.reshape(model.spec.L, model.spec.L), model)
        total = evaluate(model, repaired)["total"]
        key = repaired.x.tobytes()
        if best_total is None or total < best_total or (
            total == best_total and key < best_x.tobytes()
        ):
            best_total = total
            best_x = repaired.x
    return _finish(model, best_x.astype(np.int8).ravel(), "anneal", schedule.seed, t0)


def repair(x: DiscreteGeofence | np.ndarray, model: QuadraticModel) -> DiscreteGeofence:
    """Greedily enforce the area window by best-marginal cell flips.

    Over the cap: repeatedly drop the selected free cell whose removal
    improves the objective most. Under the floor: repeatedly add the best
    free cell. Fixed cells are never touched; ties go to the smaller flat
    index. Feasible inputs come back unchanged.
    """
    arr = (x.x if isinstance(x, DiscreteGeofence) else np.asarray(x)).astype(np.int8)
    if not check_fixed(model, arr):
        raise ValueError("input violates fixed assignments")
    rd = _reduce(model)
    _check_reachable(rd)
    bits = arr.ravel()[rd.free].copy()
    lo, hi = max(rd.lo, 0), min(rd.hi, rd.k)
    pc = int(bits.sum())
    if lo <= pc <= hi:
        return DiscreteGeofence(arr.reshape(model.spec.L, model.spec.L), model.spec)
    gains = _free_gains(rd, bits)

    def flip(p: int) -> None:
        s = 1 - 2 * bits[p]
        bits[p] = 1 - bits[p]
        mask = rd.pa == p
        np.add.at(gains, rd.pb[mask], rd.pw[mask] * s)
        mask = rd.pb == p
        np.add.at(gains, rd.pa[mask], rd.pw[mask] * s)

    while pc > hi:
        cand = np.where(bits == 1, -gains, np.inf)
        flip(int(np.argmin(cand)))
        pc -= 1
    while pc < lo:
        cand = np.where(bits == 0, gains, np.inf)
        flip(int(np.argmin(cand)))
        pc += 1
    out = _full_state(model, rd, bits)
    return DiscreteGeofence(out.reshape(model.spec.L, model.spec.L), model.spec)


def local_search(
    x: DiscreteGeofence | np.ndarray, model: QuadraticModel, max_passes: int = 50
) -> DiscreteGeofence:
    """Best-improvement 1-flip and swap descent, feasibility preserving.

    Each pass scans all window-respecting single flips and all add/remove
    swaps, applies the strictest improvement (ties: removes, then adds, then
    swaps, each in ascending index order), and stops at a local optimum or
    the pass budget.
    """
    arr = (x.x if isinstance(x, DiscreteGeofence) else np.asarray(x)).astype(np.int8)
    if not check_fixed(model, arr) or window_violation(model, arr) != 0:
        raise ValueError("local_search requires a feasible starting selection")
    rd = _reduce(model)
    bits = arr.ravel()[rd.free].copy()
    lo, hi = max(rd.lo, 0), min(rd.hi, rd.k)
    tol = 1e-12
    for _ in range(max_passes):
        gains = _free_gains(rd, bits)
        pc = int(bits.sum())
        sel = np.flatnonzero(bits == 1)
        uns = np.flatnonzero(bits == 0)
        best_de = -tol
        best_move: tuple[int, ...] | None = None
        if pc - 1 >= lo and sel.size:
            d_rem = -gains[sel]
            i = int(np.argmin(d_rem))
            if d_rem[i] < best_de:
                best_de = float(d_rem[i])
                best_move = (int(sel[i]),)
        if pc + 1 <= hi and uns.size:
            d_add = gains[uns]
            i = int(np.argmin(d_add))
            if d_add[i] < best_de:
                best_de = float(d_add[i])
                best_move = (int(uns[i]),)
        if sel.size and uns.size:
            cross = np.zeros((uns.size, sel.size))
            upos = {int(v): i for i, v in enumerate(uns)}
            spos = {int(v): i for i, v in enumerate(sel)}
            for a, b, w in zip(rd.pa, rd.pb, rd.pw):
                a, b = int(a), int(b)
                if a in upos and b in spos:
                    cross[upos[a], spos[b]] += w
                if b in upos and a in spos:
                    cross[upos[b], spos[a]] += w
            d_swap = gains[uns][:, None] - gains[sel][None, :] - cross
            i = int(np.argmin(d_swap))
            ai, bi = divmod(i, sel.size)
            if d_swap[ai, bi] < best_de:
                best_de = float(d_swap[ai, bi])
                best_move = (int(uns[ai]), int(sel[bi]))
        if best_move is None:
            break
        if len(best_move) == 1:
            p = best_move[0]
            bits[p] = 1 - bits[p]
        else:
            bits[best_move[0]] = 1
            bits[best_move[1]] = 0
    out = _full_state(model, rd, bits)
    return DiscreteGeofence(out.reshape(model.spec.L, model.spec.L), model.spec)


def greedy_cover_baseline(model: QuadraticModel) -> DiscreteGeofence:
    """Reference heuristic: take the top weighted-density cells, then repair.

    Used as the quality floor the annealer must beat or match.
    """
    rd = _reduce(model)
    _check_reachable(rd)
    if model.terms is not None:
        score = (model.terms.C * model.terms.V).ravel()[rd.free]
    else:
        score = -model.linear[rd.free]
    order = np.lexsort((np.arange(rd.k), -score))
    bits = np.zeros(rd.k, dtype=np.int8)
    if model.window is not None:
        take = min(max(rd.lo, 0), rd.k)
        take = max(take, min(min(rd.hi, rd.k), int((score > 0).sum())))
        bits[order[:take]] = 1
    else:
        bits[score > 0] = 1
    x = _full_state(model, rd, bits)
    return repair(x.reshape(model.spec.L, model.spec.L), model)


def coarsen_density(V: np.ndarray, levels: int = 1) -> np.ndarray:
    """2x2 max-pool applied `levels` times; keeps the peak value intact."""
    out = np.asarray(V, dtype=float)
    for _ in range(levels):
        L = out.shape[0]
        if L % 2:
            raise ValueError("side must be even to coarsen")
        out = out.reshape(L // 2, 2, L // 2, 2).max(axis=(1, 3))
    return out


def _dilate(mask: np.ndarray) -> np.ndarray:
    out = mask.copy()
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            a, b = _shift_mask(mask, dr, dc)
            out[a] |= mask[b]
    return out


def _shift_mask(mask: np.ndarray, dr: int, dc: int):
    L = mask.shape[0]
    r0, r1 = max(0, dr), min(L, L + dr)
    c0, c1 = max(0, dc), min(L, L + dc)
    dst = (slice(r0, r1), slice(c0, c1))
    src = (slice(r0 - dr, r1 - dr), slice(c0 - dc, c1 - dc))
    return dst, src


def solve_hierarchical(
    V_fine: CellMatrix | np.ndarray,
    poi: PoiCell,
    weights: Weights,
    window_pct: tuple[float, float],
    d_coarse: int,
    d_fine: int,
    flags: ModelFlags | None = None,
    schedule: AnnealSchedule | None = None,
) -> SolveResult:
    """Coarse-to-fine solve: locate candidates at d_coarse, refine at d_fine.

    The coarse selection is dilated by one coarse cell; at the fine level
    every cell outside that region is fixed to 0 and the restricted model is
    solved. The window percentages are re-applied to each level's cell count.
    Each stage uses exact enumeration when it fits, annealing otherwise. The
    reported breakdown and feasibility are measured against the unrestricted
    fine model.
    """
    t0 = time.perf_counter()
    if not 1 <= d_coarse < d_fine:
        raise ValueError("need 1 <= d_coarse < d_fine")
    flags = flags if flags is not None else ModelFlags()
    schedule = schedule or AnnealSchedule()
    if isinstance(V_fine, CellMatrix):
        vals, spec_fine = V_fine.values, V_fine.spec
        if spec_fine.d != d_fine:
            raise ValueError(f"V_fine is level {spec_fine.d}, expected {d_fine}")
    else:
        vals = np.asarray(V_fine, dtype=float)
        spec_fine = GridSpec(d_fine, (0.0, 0.0, 1.0, 1.0))
    if vals.shape[0] != 2**d_fine:
        raise ValueError("V_fine side does not match d_fine")
    min_pct, max_pct = window_pct
    if not 0 <= min_pct <= max_pct <= 1:
        raise ValueError("window percentages must satisfy 0 <= min <= max <= 1")

    delta = d_fine - d_coarse
    v_coarse = coarsen_density(vals, delta)
    poi_coarse = PoiCell(poi.row >> delta, poi.col >> delta)
    n_c = (2**d_coarse) ** 2
    win_c = AreaWindow(int(min_pct * n_c), max(int(max_pct * n_c), 1))
    flags_coarse = ModelFlags(poi_hard=flags.poi_hard, dw_directions=flags.dw_directions)
    coarse_model = build_model(v_coarse, poi_coarse, weights, win_c, flags_coarse)
    coarse = _dispatch(coarse_model, schedule)

    mask = _dilate(coarse.x.x.astype(bool))
    f = 2**delta
    mask_fine = np.kron(mask, np.ones((f, f), dtype=bool))
    outside = {
        (int(r), int(c)) for r, c in zip(*np.nonzero(~mask_fine))
    }
    n_f = (2**d_fine) ** 2
    win_f = AreaWindow(int(min_pct * n_f), max(int(max_pct * n_f), 1))
    flags_fine = ModelFlags(
        poi_hard=flags.poi_hard,
        dw_directions=flags.dw_directions,
        forbidden_cells=frozenset(flags.forbidden_cells) | outside,
    )
    restricted = build_model(CellMatrix(vals, spec_fine), poi, weights, win_f, flags_fine)
    fine = _dispatch(restricted, schedule)

    full_model = build_model(CellMatrix(vals, spec_fine), poi, weights, win_f, flags)
    result = _finish(full_model, fine.x.x.ravel(), "hier", schedule.seed, t0)
    return result


def _dispatch(model: QuadraticModel, schedule: AnnealSchedule) -> SolveResult:
    rd = _reduce(model)
    if rd.k <= EXACT_MAX_FREE:
        return solve_exact(model)
    return solve_anneal(model, schedule)
