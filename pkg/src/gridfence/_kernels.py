"""Numba kernel for the simulated-annealing inner loop.

Kept in its own module so importing the package (or running CLI commands
that never anneal) does not pay the numba import / JIT cost.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _window_penalty(pc: int, lo: int, hi: int, lam: float) -> float:
    if pc < lo:
        d = lo - pc
        return lam * d * d
    if pc > hi:
        d = pc - hi
        return lam * d * d
    return 0.0


@njit(cache=True)
def anneal_chunk(
    x: np.ndarray,          # int8[n] current state, mutated in place
    gains: np.ndarray,      # float64[n]; gains[i] = h[i] + sum_j w_ij x[j]
    nbr_start: np.ndarray,  # int64[n+1] CSR offsets
    nbr_idx: np.ndarray,    # int64[nnz*2] neighbor indices
    nbr_w: np.ndarray,      # float64[nnz*2] coupling weights
    sites: np.ndarray,      # int64[T] flip sites for this chunk
    urand: np.ndarray,      # float64[T] uniform draws for this chunk
    temps: np.ndarray,      # float64[T] per-step temperatures
    lam: float,
    lo: int,
    hi: int,
    pc: int,
    cur_e: float,
    best_e: float,
    best_x: np.ndarray,     # int8[n] best-seen state, mutated in place
    check_every: int,
) -> tuple[int, float, float]:
    """Metropolis single-bit-flip steps with incremental energy bookkeeping.

    cur_e tracks quadratic energy (constant omitted) plus the one-sided
    quadratic window penalty. Best-state snapshots are taken every
    check_every steps to keep the copy cost off the hot path.
    """
    for k in range(sites.shape[0]):
        i = sites[k]
        s = 1 - 2 * x[i]
        de = s * gains[i]
        de += _window_penalty(pc + s, lo, hi, lam) - _window_penalty(pc, lo, hi, lam)
        if de <= 0.0 or urand[k] < math.exp(-de / temps[k]):
            x[i] = 1 - x[i]
            pc += s
            cur_e += de
            for p in range(nbr_start[i], nbr_start[i + 1]):
                gains[nbr_idx[p]] += nbr_w[p] * s
        if (k + 1) % check_every == 0 and cur_e < best_e:
            best_e = cur_e
            best_x[:] = x
    return pc, cur_e, best_e
