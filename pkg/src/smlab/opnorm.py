"""Vector and operator norms on l^p_n."""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


def lp_norm(x, p, axis=-1):
    """``||x||_p`` along ``axis`` (p may be ``inf``)."""
    a = np.abs(np.asarray(x))
    if p == np.inf:
        return np.max(a, axis=axis)
    if p == 2:
        return np.sqrt(np.sum(a * a, axis=axis))
    if p == 1:
        return np.sum(a, axis=axis)
    return np.sum(a**p, axis=axis) ** (1.0 / p)


def _dual_vector(y, p, axis=-1):
    """Unit vectors ``z`` in l^q with ``<z, y> = ||y||_p`` (``1/p + 1/q = 1``)."""
    a = np.abs(y)
    nrm = np.expand_dims(lp_norm(y, p, axis=axis), axis)
    phase = np.where(a > 0, y / np.where(a > 0, a, 1.0), 0.0)
    return phase * (a / np.where(nrm > 0, nrm, 1.0)) ** (p - 1)


@dataclass(frozen=True)
class NormBracket:
    """``lower <= ||T||_{p->p} <= upper``; ``witness`` attains ``lower``."""

    lower: float
    upper: float
    witness: np.ndarray = None

    @property
    def exact(self):
        return self.lower == self.upper

    @property
    def value(self):
        return self.upper if self.exact else 0.5 * (self.lower + self.upper)


def _power_search(T, p, starts, iters=100):
    """Higham's p-norm power method run from all starts at once; best ratio found."""
    q = p / (p - 1.0)
    TH = T.conj().T
    X = np.stack(starts, axis=1)
    X = X[:, lp_norm(X, p, axis=0) > 0]
    X = X / lp_norm(X, p, axis=0)
    best = np.zeros(X.shape[1])
    best_X = X.copy()
    active = np.ones(X.shape[1], dtype=bool)
    for _ in range(iters):
        Y = T @ X
        val = lp_norm(Y, p, axis=0)
        up = val > best
        best_X[:, up] = X[:, up]
        gain = np.where(up, val - best, 0.0)
        best = np.maximum(best, val)
        Z = TH @ _dual_vector(Y, p, axis=0)
        # a column stops at a stationary point of the ratio or when it stalls
        stat = lp_norm(Z, q, axis=0) <= np.real(np.sum(X.conj() * Z, axis=0)) * (1 + 1e-12)
        active &= ~stat & (gain > 1e-10 * best)
        if not np.any(active):
            break
        Xn = _dual_vector(Z, q, axis=0)
        nrm = lp_norm(Xn, p, axis=0)
        active &= nrm > 0  # columns mapped to zero cannot move
        Xn = Xn / np.where(nrm > 0, nrm, 1.0)
        X = np.where(active[None, :], Xn, X)
    k = int(np.argmax(best))
    return float(best[k]), best_X[:, k]


def operator_norm(T, p, restarts=4, seed=0):
    """Bracket for ``||T||_{l^p -> l^p}``.

    Exact for ``p`` in {1, 2, inf}.  Otherwise the lower bound is the best
    ratio ``||T x||_p / ||x||_p`` reached by a p-norm power search (started at
    the top singular vectors, the coordinate vectors with largest image and a
    few seeded random vectors), and the upper bound is the Riesz-Thorin
    interpolation ``||T||_1^(1/p) ||T||_inf^(1-1/p)``.
    """
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    p = float(p)
    if not p >= 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    if T.size == 0 or not np.any(T):
        return NormBracket(0.0, 0.0, np.ones(T.shape[1], dtype=complex))
    col = np.sum(np.abs(T), axis=0)
    row = np.sum(np.abs(T), axis=1)
    if p == 1:
        j = int(np.argmax(col))
        e = np.zeros(T.shape[1], dtype=complex)
        e[j] = 1
        return NormBracket(float(col[j]), float(col[j]), e)
    if p == np.inf:
        i = int(np.argmax(row))
        x = np.conj(T[i]) / np.where(np.abs(T[i]) > 0, np.abs(T[i]), 1.0)
        x = np.where(np.abs(T[i]) > 0, x, 1.0)
        return NormBracket(float(row[i]), float(row[i]), x)
    U, S, Vh = np.linalg.svd(T)
    if p == 2:
        return NormBracket(float(S[0]), float(S[0]), Vh[0].conj())
    upper = float(col.max() ** (1.0 / p) * row.max() ** (1.0 - 1.0 / p))
    starts = [Vh[k].conj() for k in range(min(2, len(S)))]
    for j in np.argsort(-col)[:2]:
        e = np.zeros(T.shape[1], dtype=complex)
        e[j] = 1
        starts.append(e)
    starts.append(np.ones(T.shape[1], dtype=complex))
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(restarts):
        starts.append(rng.standard_normal(T.shape[1]) + 1j * rng.standard_normal(T.shape[1]))
    lower, x = _power_search(T, p, starts)
    lower = float(lp_norm(T @ x, p) / lp_norm(x, p))
    return NormBracket(min(lower, upper), upper, x)


def opnorm(T, p):
    """Best available single value: exact when known, else the certified lower bound."""
    return operator_norm(T, p).lower
