"""Truncated Taylor series arithmetic.

A jet of order m is a complex array ``c`` of length m + 1 standing for
``sum_k c[k] * eps**k``.  Only the handful of operations needed to
differentiate closed-form multipliers are provided.
"""

import numpy as np


def variable(x0, order):
    """Jet of the identity map expanded at ``x0``."""
    c = np.zeros(order + 1, dtype=complex)
    c[0] = x0
    if order >= 1:
        c[1] = 1.0
    return c


def constant(value, order):
    c = np.zeros(order + 1, dtype=complex)
    c[0] = value
    return c


def mul(a, b):
    return np.convolve(a, b)[: len(a)]


def div(a, b):
    if b[0] == 0:
        raise ZeroDivisionError("jet division by a jet vanishing at the base point")
    q = np.zeros_like(a, dtype=complex)
    for k in range(len(a)):
        q[k] = (a[k] - np.dot(b[1 : k + 1], q[k - 1 :: -1][:k])) / b[0]
    return q


def exp(a):
    out = np.zeros_like(a, dtype=complex)
    out[0] = np.exp(a[0])
    for k in range(1, len(a)):
        j = np.arange(1, k + 1)
        out[k] = np.dot(j * a[1 : k + 1], out[k - j]) / k
    return out


def log(a):
    if a[0] == 0:
        raise ZeroDivisionError("log of a jet vanishing at the base point")
    out = np.zeros_like(a, dtype=complex)
    out[0] = np.log(complex(a[0]))
    for k in range(1, len(a)):
        j = np.arange(1, k)
        out[k] = (a[k] - np.dot(j * out[j], a[k - j]) / k) / a[0]
    return out


def power(a, gamma):
    """Principal branch ``a**gamma``."""
    return exp(gamma * log(a))


def cos(a):
    return 0.5 * (exp(1j * a) + exp(-1j * a))


def sin(a):
    return (exp(1j * a) - exp(-1j * a)) / 2j


def polyval(coeffs, a):
    """Evaluate ``sum_k coeffs[k] * a**k`` (ascending coefficients) on a jet."""
    out = np.zeros_like(a, dtype=complex)
    for c in reversed(coeffs):
        out = mul(out, a)
        out[0] += c
    return out


def shift(a, c):
    """Jet of ``a + c`` for a scalar ``c``."""
    out = np.array(a, dtype=complex)
    out[0] += c
    return out
