"""Reference implementations used to cross-check the package.

Everything here is coded straight from the term definitions with plain loops
(or, for the enumerator, simple array slicing over the full state table) and
deliberately shares no code with the compiled-coefficient path in
gridfence.model / gridfence.solvers.
"""
import math

import numpy as np

NEIGHBOR_SETS = {
    "RD": ((0, 1), (1, 1), (1, 0)),
    "LU": ((0, -1), (-1, -1), (-1, 0)),
    "RU": ((0, 1), (-1, 1), (-1, 0)),
    "LD": ((0, -1), (1, -1), (1, 0)),
}


def ref_cover_weights(L, poi, alpha):
    C = np.empty((L, L))
    for i in range(L):
        for j in range(L):
            C[i, j] = (1.0 + abs(i - poi[0]) + abs(j - poi[1])) ** (-alpha)
    return C


def ref_terms(V, X, poi, alpha, sigma, directions):
    """(area, cover, dw, ng) computed with explicit per-cell loops."""
    V = np.asarray(V, dtype=float)
    X = np.asarray(X, dtype=float)
    L = X.shape[0]
    C = ref_cover_weights(L, poi, alpha)
    area = float(X.sum())
    cover = 0.0
    for i in range(L):
        for j in range(L):
            cover += C[i, j] * V[i, j] * X[i, j]
    dw = 0.0
    for name in sorted(directions):
        for dr, dc in NEIGHBOR_SETS[name]:
            for r in range(L):
                for c in range(L):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < L and 0 <= cc < L:
                        dw += X[r, c] * (1.0 - X[rr, cc])
    ng = 0.0
    for r in range(L):
        for c in range(L):
            for dr, dc in ((0, 1), (1, 0)):
                rr, cc = r + dr, c + dc
                if rr < L and cc < L:
                    q = math.exp(-((V[r, c] - V[rr, cc]) ** 2) / (2.0 * sigma * sigma))
                    ng += q * (X[r, c] * (1.0 - X[rr, cc]) + X[rr, cc] * (1.0 - X[r, c]))
    return area, cover, dw, ng


def ref_energy(V, X, poi, weights, directions, windowed):
    """Objective a_area*area - a_cover*cover + a_2dw*dw + a_ng*ng.

    With a hard window the area coefficient drops out.
    """
    area, cover, dw, ng = ref_terms(V, X, poi, weights.alpha, weights.sigma, directions)
    a_area = 0.0 if windowed else weights.a_area
    return a_area * area - weights.a_cover * cover + weights.a_2dw * dw + weights.a_ng * ng


def _dir_sum(Xs, dr, dc):
    # sum of x_src * (1 - x_dst) over all in-bounds (src, src+offset) pairs,
    # vectorized over the leading state axis
    L = Xs.shape[1]
    r0, r1 = max(0, -dr), L - max(0, dr)
    c0, c1 = max(0, -dc), L - max(0, dc)
    a = Xs[:, r0:r1, c0:c1]
    b = Xs[:, r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    return (a * (1.0 - b)).sum(axis=(1, 2))


def ref_energy_table(V, poi, weights, directions, windowed, states):
    """Energies of many states at once; same math as ref_energy."""
    V = np.asarray(V, dtype=float)
    L = V.shape[0]
    Xs = states.reshape(-1, L, L).astype(np.float64)
    C = ref_cover_weights(L, poi, weights.alpha)
    E = -weights.a_cover * np.einsum("sij,ij->s", Xs, C * V)
    if not windowed:
        E += weights.a_area * Xs.sum(axis=(1, 2))
    for name in sorted(directions):
        for dr, dc in NEIGHBOR_SETS[name]:
            E += weights.a_2dw * _dir_sum(Xs, dr, dc)
    s2 = 2.0 * weights.sigma**2
    qh = np.exp(-((V[:, :-1] - V[:, 1:]) ** 2) / s2)
    qv = np.exp(-((V[:-1, :] - V[1:, :]) ** 2) / s2)
    ah, bh = Xs[:, :, :-1], Xs[:, :, 1:]
    av, bv = Xs[:, :-1, :], Xs[:, 1:, :]
    E += weights.a_ng * np.einsum("sij,ij->s", ah * (1 - bh) + bh * (1 - ah), qh)
    E += weights.a_ng * np.einsum("sij,ij->s", av * (1 - bv) + bv * (1 - av), qv)
    return E


class RefEnumeration:
    """Brute force over every assignment of the free cells.

    States are ordered so that state index s equals the full bit pattern read
    as an MSB-first integer over ascending free cell index; np.argmin over
    that table therefore lands on the lexicographically smallest minimizer.
    """

    def __init__(self, V, poi, weights, directions, window, fixed):
        V = np.asarray(V, dtype=float)
        n = V.size
        self.free = [i for i in range(n) if i not in fixed]
        k = len(self.free)
        if k > 20:
            raise ValueError("reference enumeration capped at 20 free cells")
        count = 1 << k
        states = np.zeros((count, n), dtype=np.int8)
        idx = np.arange(count)
        for pos, i in enumerate(self.free):
            states[:, i] = (idx >> (k - 1 - pos)) & 1
        for i, v in fixed.items():
            states[:, i] = v
        energies = ref_energy_table(V, poi, weights, directions, window is not None, states)
        valid = np.ones(count, dtype=bool)
        if window is not None:
            pc = states.sum(axis=1)
            valid = (pc >= window[0]) & (pc <= window[1])
        if not valid.any():
            raise ValueError("no feasible state")
        self.states = states
        self.energies = np.where(valid, energies, np.inf)
        self.best_index = int(np.argmin(self.energies))

    @property
    def best_energy(self):
        return float(self.energies[self.best_index])

    @property
    def best_state(self):
        return self.states[self.best_index].copy()

    def index_of(self, x_flat):
        """State-table index of a full assignment (for exact value lookups)."""
        s = 0
        for i in self.free:
            s = (s << 1) | int(x_flat[i])
        return s

    def energy_of(self, x_flat):
        return float(self.energies[self.index_of(np.asarray(x_flat).ravel())])
