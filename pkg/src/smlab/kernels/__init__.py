"""Rademacher-sum kernels: compiled when available, numpy otherwise.

Set ``SMLAB_PURE_PYTHON=1`` to force the numpy implementation.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("SMLAB_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def rademacher_exact(X, p):
    """Exact mean of ``||sum_k eps_k X[k]||_p`` over all sign patterns."""
    return float(_impl.rademacher_exact(np.ascontiguousarray(X, dtype=np.complex128), float(p)))


def rademacher_sample_norms(X, signs, p):
    """Norms of the signed sums for each row of ``signs`` (entries +-1)."""
    return np.asarray(
        _impl.rademacher_sample_norms(
            np.ascontiguousarray(X, dtype=np.complex128),
            np.ascontiguousarray(signs, dtype=np.int8),
            float(p),
        )
    )


__all__ = ["BACKEND", "rademacher_exact", "rademacher_sample_norms"]
