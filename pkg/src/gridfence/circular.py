"""Circular geofence baseline: objectives and a seeded metaheuristic optimizer.

The classical design problem places a disk (cx, cy, r) near a point of
interest so that the disk stays small while covering a required fraction of
users. A cover-oriented variant instead fixes the radius (within a small
tolerance) and recenters the disk to maximize user coverage.

Optimization uses a self-contained differential evolution (rand/1/bin). A
library optimizer would work, but a hand-rolled loop keeps the random stream
explicit and generation-synchronous, which is what makes fixed-seed runs
bit-reproducible regardless of how objective evaluations are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .ingest import TrajectorySet

DE_F = 0.7
DE_CR = 0.9
# half the diagonal of the unit square
DEFAULT_R_MAX = math.sqrt(2.0) / 2.0


@dataclass(frozen=True)
class CircularGeofence:
    """Disk geofence in normalized coordinates."""

    cx: float
    cy: float
    r: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.cx) and math.isfinite(self.cy)):
            raise ValueError("center must be finite")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"radius must be positive, got {self.r}")


@dataclass(frozen=True)
class CircularParams:
    """Penalty settings and search budget for the circular optimizers.

    ``negate_objective`` flips the sign of the optimized objective; the
    design problem is stated here as minimization (small disk + coverage
    penalty), and the flag exists for anyone who wants the literal
    maximization reading instead.
    """

    cr_limit: float = 0.5
    mu: float = 10.0
    r_max: float = DEFAULT_R_MAX
    r_min: float = 1e-6
    population: int = 64
    generations: int = 300
    seed: int = 0
    negate_objective: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.cr_limit <= 1.0:
            raise ValueError("cr_limit must be in [0, 1]")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if self.population < 4:
            raise ValueError("population must be >= 4 for rand/1 mutation")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")


def distance_objective(g: CircularGeofence, poi: tuple[float, float]) -> float:
    """Mean of the nearest and farthest disk point distances from the POI.

    With d the center distance this is (1/2)(d + r + |d - r|), which equals
    max(d, r): the disk is penalized for being large and for drifting away
    from the POI, whichever binds.
    """
    d = math.hypot(poi[0] - g.cx, poi[1] - g.cy)
    val = 0.5 * (d + g.r + abs(d - g.r))
    assert abs(val - max(d, g.r)) <= 1e-12 * max(1.0, val)
    return val


def user_coverage(g: CircularGeofence, data: TrajectorySet) -> float:
    """Fraction of users with at least one point strictly inside the disk."""
    if len(data) == 0:
        raise ValueError("coverage undefined for an empty trajectory set")
    r2 = g.r * g.r
    covered = 0
    for tr in data:
        if np.any((tr.x - g.cx) ** 2 + (tr.y - g.cy) ** 2 < r2):
            covered += 1
    return covered / len(data)


def min_coverage_penalty(
    g: CircularGeofence, data: TrajectorySet, cr_limit: float, mu: float
) -> float:
    """mu * max(0, cr_limit - coverage); zero exactly when coverage suffices."""
    return mu * max(0.0, cr_limit - user_coverage(g, data))


def circular_objective(
    g: CircularGeofence, poi: tuple[float, float], data: TrajectorySet, params: CircularParams
) -> float:
    """Full baseline objective: distance term plus minimum-coverage penalty."""
    return distance_objective(g, poi) + min_coverage_penalty(
        g, data, params.cr_limit, params.mu
    )


class _CoverageEval:
    """Vectorized user-coverage evaluation over candidate disks.

    Points are stored grouped by user so a segmented any-reduction yields the
    per-user covered indicator for a whole candidate batch at once.
    """

    def __init__(self, data: TrajectorySet) -> None:
        pts, _ = data.stacked()
        self.px = pts[:, 1]
        self.py = pts[:, 2]
        counts = np.array([len(tr) for tr in data])
        self.starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        self.n_users = len(data)

    def coverage(self, cx: np.ndarray, cy: np.ndarray, r: np.ndarray) -> np.ndarray:
        dx = self.px[None, :] - cx[:, None]
        dy = self.py[None, :] - cy[:, None]
        inside = dx * dx + dy * dy < (r * r)[:, None]
        per_user = np.logical_or.reduceat(inside, self.starts, axis=1)
        return per_user.mean(axis=1)


def _rand1bin_triples(rng: np.random.Generator, p: int) -> np.ndarray:
    out = np.empty((p, 3), dtype=np.int64)
    for i in range(p):
        picks = rng.choice(p - 1, size=3, replace=False)
        picks[picks >= i] += 1
        out[i] = picks
    return out


def _evolve(batch_objective, lower, upper, x0, params: CircularParams) -> np.ndarray:
    """rand/1/bin differential evolution; returns the best parameter vector.

    All randomness for a generation is drawn before any trial is evaluated,
    so evaluation order (or parallelism) cannot perturb the seeded stream.
    """
    rng = np.random.default_rng(params.seed)
    p = params.population
    dim = lower.size
    pop = lower + (upper - lower) * rng.random((p, dim))
    pop[0] = np.clip(np.asarray(x0, dtype=float), lower, upper)
    fit = batch_objective(pop)
    if not np.all(np.isfinite(fit)):
        raise RuntimeError("non-finite objective on initial population")
    for _ in range(params.generations):
        triples = _rand1bin_triples(rng, p)
        cross = rng.random((p, dim)) < DE_CR
        cross[np.arange(p), rng.integers(dim, size=p)] = True
        mutant = pop[triples[:, 0]] + DE_F * (pop[triples[:, 1]] - pop[triples[:, 2]])
        trial = np.where(cross, mutant, pop)
        np.clip(trial, lower, upper, out=trial)
        tfit = batch_objective(trial)
        adv = tfit < fit
        pop[adv] = trial[adv]
        fit[adv] = tfit[adv]
    return pop[int(np.argmin(fit))]


def optimize_circular(
    data: TrajectorySet, poi: tuple[float, float], params: CircularParams
) -> CircularGeofence:
    """Search (cx, cy, r) minimizing distance objective + coverage penalty.

    Bounds: center in [0,1]^2, radius in [r_min, r_max]. The point
    (poi_x, poi_y, r_max) is injected into the initial population, so the
    returned disk is never worse than that trivially feasible start.
    """
    if len(data) == 0:
        raise ValueError("cannot optimize over an empty trajectory set")
    px, py = float(poi[0]), float(poi[1])
    cov = _CoverageEval(data)
    sign = -1.0 if params.negate_objective else 1.0

    def batch(popmat: np.ndarray) -> np.ndarray:
        d = np.hypot(popmat[:, 0] - px, popmat[:, 1] - py)
        r = popmat[:, 2]
        f = 0.5 * (d + r + np.abs(d - r))
        pen = params.mu * np.maximum(0.0, params.cr_limit - cov.coverage(
            popmat[:, 0], popmat[:, 1], r))
        return sign * (f + pen)

    lower = np.array([0.0, 0.0, params.r_min])
    upper = np.array([1.0, 1.0, params.r_max])
    best = _evolve(batch, lower, upper, (px, py, params.r_max), params)
    return CircularGeofence(float(best[0]), float(best[1]), float(best[2]))


def optimize_cover_oriented(
    data: TrajectorySet,
    poi: tuple[float, float],
    r_star: float,
    epsilon: float = 0.01,
    params: CircularParams = CircularParams(),
) -> CircularGeofence:
    """Maximize user coverage with the radius pinned to [r_star-eps, r_star+eps].

    Keeps the disk essentially the same size as a reference design while the
    center chases density. epsilon defaults to 0.01.
    """
    if len(data) == 0:
        raise ValueError("cannot optimize over an empty trajectory set")
    if not r_star > epsilon > 0:
        raise ValueError(f"need r_star > epsilon > 0, got r_star={r_star} epsilon={epsilon}")
    cov = _CoverageEval(data)

    def batch(popmat: np.ndarray) -> np.ndarray:
        return -cov.coverage(popmat[:, 0], popmat[:, 1], popmat[:, 2])

    lower = np.array([0.0, 0.0, r_star - epsilon])
    upper = np.array([1.0, 1.0, r_star + epsilon])
    x0 = (float(poi[0]), float(poi[1]), float(r_star))
    best = _evolve(batch, lower, upper, x0, params)
    return CircularGeofence(float(best[0]), float(best[1]), float(best[2]))


def with_seed(params: CircularParams, seed: int) -> CircularParams:
    return replace(params, seed=seed)
