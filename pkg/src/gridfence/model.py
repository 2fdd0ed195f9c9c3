"""Discrete geofence model: four objective terms compiled to a 0-1 quadratic form.

A geofence is a binary L x L selection matrix X. The objective combines

    a_area * f_area - a_cover * f_cover + a_2dw * f_2dw + a_ng * f_ng

where f_area counts selected cells, f_cover rewards density near the POI,
f_2dw penalizes staircase-pattern domain walls along diagonal sweep
directions, and f_ng penalizes selected/unselected neighbor pairs whose
densities are similar. Using x^2 = x for binaries, everything collapses to
linear + pairwise coefficients over n = L^2 variables (flat index row*L+col).

Two formulations: unconstrained (area enters as a weighted term) and
hard-window (a_area dropped, popcount constrained to [min_cells, max_cells]).
The window is carried as metadata, not penalty-encoded, so each solver can
handle it natively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .ingest import CellMatrix, GridSpec, PoiCell

# Direction names use matrix convention: row+1 is "down", col+1 is "right".
# Each entry lists the (dr, dc) neighbor offsets swept by that direction.
DIRECTION_OFFSETS: dict[str, tuple[tuple[int, int], ...]] = {
    "RD": ((0, 1), (1, 1), (1, 0)),
    "LU": ((0, -1), (-1, -1), (-1, 0)),
    "RU": ((0, 1), (-1, 1), (-1, 0)),
    "LD": ((0, -1), (1, -1), (1, 0)),
}


@dataclass(frozen=True)
class Weights:
    """Objective term coefficients plus the two kernel shape parameters.

    alpha is the Manhattan distance-decay exponent of the cover weights;
    sigma is the Gaussian width of the adjacency coefficients. Neither has a
    canonical value; alpha=0.5 matches the reference experiments and
    sigma=0.5 is this package's default.
    """

    a_area: float = 1.0
    a_cover: float = 60.0
    a_2dw: float = 1.0
    a_ng: float = 1.0
    alpha: float = 0.5
    sigma: float = 0.5

    def __post_init__(self) -> None:
        for name in ("a_area", "a_cover", "a_2dw", "a_ng"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class AreaWindow:
    """Hard bounds on the number of selected cells."""

    min_cells: int
    max_cells: int

    def __post_init__(self) -> None:
        if not 0 <= self.min_cells <= self.max_cells:
            raise ValueError(
                f"need 0 <= min_cells <= max_cells, got [{self.min_cells}, {self.max_cells}]"
            )


@dataclass(frozen=True)
class ModelFlags:
    """Structural switches: POI pinning, sweep directions, masked-out cells."""

    poi_hard: bool = False
    dw_directions: frozenset = frozenset({"RD", "LU"})
    forbidden_cells: frozenset = frozenset()

    def __post_init__(self) -> None:
        dirs = frozenset(self.dw_directions)
        if not dirs:
            raise ValueError("dw_directions must be non-empty")
        unknown = dirs - set(DIRECTION_OFFSETS)
        if unknown:
            raise ValueError(f"unknown directions {sorted(unknown)}")
        object.__setattr__(self, "dw_directions", dirs)
        object.__setattr__(
            self,
            "forbidden_cells",
            frozenset((int(r), int(c)) for r, c in self.forbidden_cells),
        )


@dataclass(frozen=True)
class DiscreteGeofence:
    """Binary L x L cell selection."""

    x: np.ndarray
    spec: GridSpec

    def __post_init__(self) -> None:
        arr = np.asarray(self.x)
        L = self.spec.L
        if arr.shape != (L, L):
            raise ValueError(f"selection must be {L}x{L}, got {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("selection entries must be 0 or 1")
        arr = arr.astype(np.int8)
        arr.setflags(write=False)
        object.__setattr__(self, "x", arr)

    @property
    def n_cells(self) -> int:
        return int(self.x.sum())

    def cells(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.x)
        return list(zip(rows.tolist(), cols.tolist()))


@dataclass(frozen=True)
class TermData:
    """Raw ingredients kept alongside a compiled model for direct evaluation."""

    V: np.ndarray
    C: np.ndarray
    weights: Weights
    flags: ModelFlags
    poi: PoiCell


@dataclass(frozen=True)
class QuadraticModel:
    """Compiled 0-1 quadratic model: E(x) = constant + h.x + sum w_ij x_i x_j.

    pairwise keys are flat-index pairs (i, j) with i < j. fixed maps flat
    indices to forced 0/1 values. When terms is present (models built from a
    density matrix, as opposed to imported coefficient files), evaluate()
    cross-checks the compiled energy against the term definitions.
    """

    n: int
    linear: np.ndarray
    pairwise: Mapping[tuple[int, int], float]
    constant: float
    window: AreaWindow | None
    fixed: Mapping[int, int]
    spec: GridSpec
    terms: TermData | None = None

    def __post_init__(self) -> None:
        lin = np.asarray(self.linear, dtype=float)
        if lin.shape != (self.n,):
            raise ValueError(f"linear must have length {self.n}")
        lin.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        for (i, j) in self.pairwise:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad pairwise key ({i}, {j})")
        # canonical key order: evaluation sums must not depend on how the
        # coefficient map was assembled (build vs JSON import)
        object.__setattr__(
            self, "pairwise", dict(sorted(self.pairwise.items()))
        )
        for i, v in self.fixed.items():
            if not 0 <= i < self.n:
                raise ValueError(f"fixed index {i} out of range")
            if v not in (0, 1):
                raise ValueError(f"fixed value for {i} must be 0/1, got {v}")
        if self.window is not None and self.window.max_cells > self.n:
            raise ValueError("window max_cells exceeds variable count")

    @property
    def free_count(self) -> int:
        return self.n - len(self.fixed)


def area_term(X: np.ndarray) -> float:
    """Number of selected cells."""
    return float(np.asarray(X).sum())


def cover_weights(spec: GridSpec, poi: PoiCell, alpha: float) -> np.ndarray:
    """Per-cell relevance (1 + manhattan(cell, poi))^(-alpha)."""
    L = spec.L
    if not (0 <= poi.row < L and 0 <= poi.col < L):
        raise ValueError(f"poi {poi} outside {L}x{L} grid")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    rows = np.abs(np.arange(L) - poi.row)
    cols = np.abs(np.arange(L) - poi.col)
    md = rows[:, None] + cols[None, :]
    return (1.0 + md) ** (-alpha)


def cover_term(X: np.ndarray, V: np.ndarray, C: np.ndarray) -> float:
    """Density mass captured by the selection, weighted by POI proximity."""
    X = np.asarray(X)
    if X.shape != np.asarray(V).shape or X.shape != np.asarray(C).shape:
        raise ValueError("X, V, C shapes must match")
    return float((C * V * X).sum())


def domain_wall_term(X: np.ndarray, directions: Iterable[str] = ("RD", "LU")) -> float:
    """Sum of X_a * (1 - X_b) over each direction's neighbor offsets.

    Neighbor sets are clipped at the grid boundary, so constant grids (all
    zeros or all ones) score 0.
    """
    dirs = list(directions)
    if not dirs:
        raise ValueError("directions must be non-empty")
    unknown = set(dirs) - set(DIRECTION_OFFSETS)
    if unknown:
        raise ValueError(f"unknown directions {sorted(unknown)}")
    X = np.asarray(X, dtype=float)
    total = 0.0
    for name in dirs:
        for dr, dc in DIRECTION_OFFSETS[name]:
            a, b = _shifted_views(X, dr, dc)
            total += float((a * (1.0 - b)).sum())
    return total


def _shifted_views(X: np.ndarray, dr: int, dc: int) -> tuple[np.ndarray, np.ndarray]:
    """Views (cells, their (dr,dc) neighbors) restricted to in-bounds pairs."""
    L = X.shape[0]
    r0, r1 = max(0, -dr), min(L, L - dr)
    c0, c1 = max(0, -dc), min(L, L - dc)
    a = X[r0:r1, c0:c1]
    b = X[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    return a, b


def adjacency_coeffs(V: np.ndarray, sigma: float) -> dict[tuple[int, int], float]:
    """Gaussian similarity on 4-neighbor pairs: exp(-(dV)^2 / (2 sigma^2)).

    Keys are unordered flat-index pairs (a, b) with a < b. Depends only on
    density differences, so shifting V by a constant leaves Q unchanged.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    V = np.asarray(V, dtype=float)
    L = V.shape[0]
    q: dict[tuple[int, int], float] = {}
    inv = 1.0 / (2.0 * sigma * sigma)
    for r in range(L):
        for c in range(L):
            a = r * L + c
            if c + 1 < L:
                q[(a, a + 1)] = math.exp(-((V[r, c] - V[r, c + 1]) ** 2) * inv)
            if r + 1 < L:
                q[(a, a + L)] = math.exp(-((V[r, c] - V[r + 1, c]) ** 2) * inv)
    return q


def adjacency_term(X: np.ndarray, Q: Mapping[tuple[int, int], float]) -> float:
    """Sum of Q_ab * X_a * (1 - X_b) over ordered 4-neighbor pairs."""
    x = np.asarray(X).ravel()
    total = 0.0
    for (a, b), w in Q.items():
        total += w * (x[a] * (1 - x[b]) + x[b] * (1 - x[a]))
    return float(total)


def build_model(
    V: CellMatrix | np.ndarray,
    poi: PoiCell,
    weights: Weights,
    window: AreaWindow | None = None,
    flags: ModelFlags | None = None,
) -> QuadraticModel:
    """Compile the four terms into linear + pairwise coefficients.

    With a window present the area term is dropped (the window replaces it as
    a hard constraint). poi_hard pins the POI cell to 1 and forbidden cells
    are pinned to 0; both become entries of the fixed map.
    """
    flags = flags if flags is not None else ModelFlags()
    if isinstance(V, CellMatrix):
        vals, spec = V.values, V.spec
    else:
        vals = np.asarray(V, dtype=float)
        L = vals.shape[0]
        if vals.ndim != 2 or vals.shape[1] != L:
            raise ValueError("V must be square")
        d = int(round(math.log2(L)))
        if 2**d != L:
            raise ValueError(f"side {L} is not a power of two")
        spec = GridSpec(d, (0.0, 0.0, 1.0, 1.0))
    L = spec.L
    n = L * L
    if not (0 <= poi.row < L and 0 <= poi.col < L):
        raise ValueError(f"poi {poi} outside grid")
    for r, c in flags.forbidden_cells:
        if not (0 <= r < L and 0 <= c < L):
            raise ValueError(f"forbidden cell ({r}, {c}) outside grid")
    if flags.poi_hard and (poi.row, poi.col) in flags.forbidden_cells:
        raise ValueError("POI cell is forbidden but poi_hard is set")
    if window is not None and window.max_cells > n:
        raise ValueError(f"window max_cells {window.max_cells} exceeds {n} cells")

    C = cover_weights(spec, poi, weights.alpha)
    h = np.zeros(n)
    pair: dict[tuple[int, int], float] = {}

    def add_pair(a: int, b: int, w: float) -> None:
        key = (a, b) if a < b else (b, a)
        pair[key] = pair.get(key, 0.0) + w

    if window is None and weights.a_area > 0:
        h += weights.a_area
    if weights.a_cover > 0:
        h -= weights.a_cover * (C * vals).ravel()
    if weights.a_2dw > 0:
        for name in sorted(flags.dw_directions):
            for dr, dc in DIRECTION_OFFSETS[name]:
                for r in range(L):
                    rr = r + dr
                    if not 0 <= rr < L:
                        continue
                    for c in range(L):
                        cc = c + dc
                        if not 0 <= cc < L:
                            continue
                        a, b = r * L + c, rr * L + cc
                        h[a] += weights.a_2dw
                        add_pair(a, b, -weights.a_2dw)
    if weights.a_ng > 0:
        for (a, b), q in adjacency_coeffs(vals, weights.sigma).items():
            h[a] += weights.a_ng * q
            h[b] += weights.a_ng * q
            add_pair(a, b, -2.0 * weights.a_ng * q)

    fixed: dict[int, int] = {}
    for r, c in sorted(flags.forbidden_cells):
        fixed[r * L + c] = 0
    if flags.poi_hard:
        fixed[poi.row * L + poi.col] = 1

    pair = {k: w for k, w in pair.items() if w != 0.0}
    terms = TermData(V=vals, C=C, weights=weights, flags=flags, poi=poi)
    return QuadraticModel(
        n=n, linear=h, pairwise=pair, constant=0.0,
        window=window, fixed=fixed, spec=spec, terms=terms,
    )


def compiled_energy(model: QuadraticModel, x_flat: np.ndarray) -> float:
    """Evaluate constant + h.x + pairwise couplings on a flat 0/1 vector."""
    e = model.constant + float(model.linear @ x_flat)
    for (a, b), w in model.pairwise.items():
        if x_flat[a] and x_flat[b]:
            e += w
    return e


def window_violation(model: QuadraticModel, X: np.ndarray) -> int:
    """Cells outside the area window (0 when no window or within bounds)."""
    if model.window is None:
        return 0
    pc = int(np.asarray(X).sum())
    return max(0, model.window.min_cells - pc) + max(0, pc - model.window.max_cells)


def check_fixed(model: QuadraticModel, X: np.ndarray) -> bool:
    x = np.asarray(X).ravel()
    return all(x[i] == v for i, v in model.fixed.items())


def evaluate(model: QuadraticModel, X: DiscreteGeofence | np.ndarray) -> dict[str, float]:
    """Objective breakdown for a selection.

    Returns total (the compiled quadratic value), the four raw term values,
    and window_violation. When the model carries its term data, the compiled
    total is cross-checked against direct recomputation from the term
    definitions; disagreement beyond tolerance means a compiler bug and
    raises immediately.
    """
    arr = X.x if isinstance(X, DiscreteGeofence) else np.asarray(X)
    L = model.spec.L
    if arr.shape != (L, L):
        raise ValueError(f"X must be {L}x{L}, got {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("X entries must be 0/1")
    x_flat = arr.astype(np.int8).ravel()
    for i, v in model.fixed.items():
        if x_flat[i] != v:
            raise ValueError(f"fixed assignment violated at flat index {i}")

    total = compiled_energy(model, x_flat)
    out: dict[str, float] = {
        "total": total,
        "area": area_term(arr),
        "cover": math.nan,
        "dw": math.nan,
        "ng": math.nan,
        "window_violation": float(window_violation(model, arr)),
    }
    t = model.terms
    if t is not None:
        w = t.weights
        cov = cover_term(arr, t.V, t.C)
        dw = domain_wall_term(arr, sorted(t.flags.dw_directions))
        ng = adjacency_term(arr, adjacency_coeffs(t.V, w.sigma))
        a_area = 0.0 if model.window is not None else w.a_area
        direct = (
            a_area * out["area"] - w.a_cover * cov + w.a_2dw * dw + w.a_ng * ng
        )
        if abs(direct - total) > 1e-9 * max(1.0, abs(total)):
            raise RuntimeError(
                f"compiled energy {total!r} disagrees with direct terms {direct!r}"
            )
        out["cover"], out["dw"], out["ng"] = cov, dw, ng
    return out


def model_to_dict(model: QuadraticModel) -> dict:
    """Plain-JSON form: {n, linear[], pairwise[{i,j,w}], constant, window, fixed[]}."""
    return {
        "n": model.n,
        "linear": [float(v) for v in model.linear],
        "pairwise": [
            {"i": i, "j": j, "w": float(w)}
            for (i, j), w in sorted(model.pairwise.items())
        ],
        "constant": float(model.constant),
        "window": (
            None
            if model.window is None
            else {"min_cells": model.window.min_cells, "max_cells": model.window.max_cells}
        ),
        "fixed": [{"i": i, "v": v} for i, v in sorted(model.fixed.items())],
    }


def model_from_dict(doc: dict) -> QuadraticModel:
    """Inverse of model_to_dict; the result has no term data (compiled only)."""
    n = int(doc["n"])
    L = int(round(math.sqrt(n)))
    d = int(round(math.log2(L))) if L > 1 else 1
    if L * L != n or 2**d != L:
        raise ValueError(f"n={n} is not a power-of-four grid size")
    window = None
    if doc.get("window") is not None:
        window = AreaWindow(int(doc["window"]["min_cells"]), int(doc["window"]["max_cells"]))
    return QuadraticModel(
        n=n,
        linear=np.asarray(doc["linear"], dtype=float),
        pairwise={(int(p["i"]), int(p["j"])): float(p["w"]) for p in doc["pairwise"]},
        constant=float(doc.get("constant", 0.0)),
        window=window,
        fixed={int(f["i"]): int(f["v"]) for f in doc.get("fixed", [])},
        spec=GridSpec(d, (0.0, 0.0, 1.0, 1.0)),
        terms=None,
    )
