import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from smlab import kernels
from smlab.kernels import _pykernels

try:
    from smlab.kernels import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])


def brute(X, p):
    vals = [np.sum(np.abs(np.dot(s, X)) ** p) ** (1 / p) for s in itertools.product([-1, 1], repeat=len(X))]
    return float(np.mean(vals))


def data(K, n, seed=0):
    rng = np.random.default_rng(seed)
    return np.ascontiguousarray(rng.standard_normal((K, n)) + 1j * rng.standard_normal((K, n)))


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 2.7])
def test_exact_matches_brute_force(mod, p):
    X = data(6, 5)
    assert abs(mod.rademacher_exact(X, p) - brute(X, p)) < 1e-12 * brute(X, p)


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_exact_beyond_resync_period(mod):
    # 2^12 patterns cross the periodic recomputation of the running sum
    X = data(13, 3, seed=1)
    ref = _pykernels.rademacher_exact(X, 1.5)
    assert abs(mod.rademacher_exact(X, 1.5) - ref) < 1e-12 * ref


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_sample_norms(mod):
    X = data(5, 4, seed=2)
    signs = np.ascontiguousarray(2 * np.random.default_rng(3).integers(0, 2, size=(50, 5)) - 1, dtype=np.int8)
    out = mod.rademacher_sample_norms(X, signs, 3.0)
    ref = np.sum(np.abs(signs.astype(float) @ X) ** 3, axis=1) ** (1 / 3)
    assert np.allclose(out, ref, rtol=1e-13)


def test_sign_patterns_first_sign_fixed():
    S = _pykernels.sign_patterns(4, 0, 8)
    assert np.all(S[:, 0] == 1)
    assert len({tuple(r) for r in S}) == 8


def test_dispatch_and_pure_python_switch():
    X = data(4, 3)
    assert abs(kernels.rademacher_exact(X, 2.0) - brute(X, 2.0)) < 1e-12
    env = dict(os.environ, SMLAB_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from smlab.kernels import BACKEND; print(BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
