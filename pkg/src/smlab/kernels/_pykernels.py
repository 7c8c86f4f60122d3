"""Pure-numpy versions of the Rademacher-sum kernels."""

import numpy as np

CHUNK = 4096


def _row_norms(V, p):
    a = np.abs(V)
    if p == 2.0:
        return np.sqrt(np.sum(a * a, axis=-1))
    if p == 1.0:
        return np.sum(a, axis=-1)
    return np.sum(a**p, axis=-1) ** (1.0 / p)


def sign_patterns(K, start, stop):
    """Rows ``start..stop-1`` of the patterns with first sign fixed to +1."""
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(K - 1, dtype=np.int64)) & 1
    signs = np.ones((stop - start, K), dtype=np.int8)
    signs[:, 1:] = 1 - 2 * bits
    return signs


def rademacher_exact(X, p):
    X = np.ascontiguousarray(X, dtype=complex)
    K = X.shape[0]
    if K == 0:
        return 0.0
    total = 1 << (K - 1)
    acc = 0.0
    for a in range(0, total, CHUNK):
        signs = sign_patterns(K, a, min(total, a + CHUNK))
        acc += float(np.sum(_row_norms(signs @ X, p)))
    return acc / total


def rademacher_sample_norms(X, signs, p):
    X = np.ascontiguousarray(X, dtype=complex)
    return _row_norms(np.asarray(signs, dtype=float) @ X, p)
