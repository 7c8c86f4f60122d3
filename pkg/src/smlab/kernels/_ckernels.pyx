# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Rademacher-sum kernels (real and imaginary parts kept in separate arrays)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt

cnp.import_array()

cdef int RESYNC = 1024


cdef inline double _ipow(double x, int q) noexcept nogil:
    cdef double out = 1.0
    while q > 0:
        if q & 1:
            out *= x
        x *= x
        q >>= 1
    return out


cdef inline double _norm(const double* re, const double* im, Py_ssize_t n, double p) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0, r2, hp = 0.5 * p
    cdef int q = <int>(2.0 * p)
    if p == 2.0:
        for i in range(n):
            acc += re[i] * re[i] + im[i] * im[i]
        return sqrt(acc)
    if p == 1.0:
        for i in range(n):
            acc += sqrt(re[i] * re[i] + im[i] * im[i])
        return acc
    if q == 2.0 * p and q <= 16:
        # |z|^p = (|z|^(1/2))^q for half-integer p: square roots and products only
        for i in range(n):
            acc += _ipow(sqrt(sqrt(re[i] * re[i] + im[i] * im[i])), q)
        return pow(acc, 1.0 / p)
    for i in range(n):
        r2 = re[i] * re[i] + im[i] * im[i]
        if r2 > 0:
            acc += pow(r2, hp)
    return pow(acc, 1.0 / p)


def rademacher_exact(cnp.complex128_t[:, ::1] X, double p):
    """Mean of ||sum_k eps_k x_k||_p over all sign patterns (Gray code order).

    The first sign is fixed to +1, which halves the work by symmetry.
    """
    cdef Py_ssize_t K = X.shape[0], n = X.shape[1]
    cdef Py_ssize_t i, k, j
    cdef long long step, total
    cdef double acc = 0.0, c
    if K == 0:
        return 0.0
    cdef double[:, ::1] Xr = np.ascontiguousarray(np.real(X))
    cdef double[:, ::1] Xi = np.ascontiguousarray(np.imag(X))
    cdef double[::1] Sr = np.zeros(n)
    cdef double[::1] Si = np.zeros(n)
    cdef double[::1] eps = np.ones(K)
    total = (<long long>1) << (K - 1)
    with nogil:
        for k in range(K):
            for i in range(n):
                Sr[i] += Xr[k, i]
                Si[i] += Xi[k, i]
        acc = _norm(&Sr[0], &Si[0], n, p)
        for step in range(1, total):
            # flip the sign whose index is the lowest set bit of step (offset by one)
            j = 0
            while not ((step >> j) & 1):
                j += 1
            j += 1
            eps[j] = -eps[j]
            if step % RESYNC == 0:
                for i in range(n):
                    Sr[i] = 0.0
                    Si[i] = 0.0
                for k in range(K):
                    c = eps[k]
                    for i in range(n):
                        Sr[i] += c * Xr[k, i]
                        Si[i] += c * Xi[k, i]
            else:
                c = 2.0 * eps[j]
                for i in range(n):
                    Sr[i] += c * Xr[j, i]
                    Si[i] += c * Xi[j, i]
            acc += _norm(&Sr[0], &Si[0], n, p)
    return acc / total


def rademacher_sample_norms(cnp.complex128_t[:, ::1] X, signed char[:, ::1] signs, double p):
    """Norms ||sum_k signs[s, k] x_k||_p for every sampled sign row.

    The signed sums are one BLAS product; only the norms are compiled.
    """
    cdef Py_ssize_t n = X.shape[1], S_ = signs.shape[0]
    cdef Py_ssize_t s
    V = np.asarray(signs, dtype=np.float64) @ np.asarray(X)
    cdef double[:, ::1] Vr = np.ascontiguousarray(V.real)
    cdef double[:, ::1] Vi = np.ascontiguousarray(V.imag)
    out = np.empty(S_, dtype=np.float64)
    cdef double[::1] o = out
    if n == 0:
        out[:] = 0.0
        return out
    with nogil:
        for s in range(S_):
            o[s] = _norm(&Vr[s, 0], &Vi[s, 0], n, p)
    return out
