"""Compare the compiled and numpy Rademacher kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per case with the best-of-N time of each backend, the
speedup and the largest relative difference of the results.
"""

import argparse
import timeit

import numpy as np

from smlab.kernels import _pykernels

try:
    from smlab.kernels import _ckernels
except ImportError:
    _ckernels = None

CASES = [
    # (kind, K vectors, dimension n, p)
    ("exact", 8, 63, 1.5),
    ("exact", 12, 16, 3.0),
    ("exact", 16, 8, 1.5),
    ("sample", 24, 16, 1.5),
    ("sample", 64, 32, 4.0),
]


def _inputs(kind, K, n, seed=0):
    rng = np.random.default_rng(seed)
    X = np.ascontiguousarray(rng.standard_normal((K, n)) + 1j * rng.standard_normal((K, n)))
    signs = None
    if kind == "sample":
        signs = np.ascontiguousarray(2 * rng.integers(0, 2, size=(16384, K)) - 1, dtype=np.int8)
    return X, signs


def _call(mod, kind, X, signs, p):
    if kind == "exact":
        return np.asarray(mod.rademacher_exact(X, p))
    return np.asarray(mod.rademacher_sample_norms(X, signs, p))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; only the numpy backend is available")
    print(f"{'case':<28}{'python [ms]':>12}{'cython [ms]':>12}{'speedup':>9}{'max rel diff':>14}")
    for kind, K, n, p in CASES:
        X, signs = _inputs(kind, K, n)
        t_py = min(timeit.repeat(lambda: _call(_pykernels, kind, X, signs, p), number=1, repeat=args.repeat))
        ref = _call(_pykernels, kind, X, signs, p)
        label = f"{kind} K={K} n={n} p={p}"
        if _ckernels is None:
            print(f"{label:<28}{1e3 * t_py:>12.2f}{'-':>12}{'-':>9}{'-':>14}")
            continue
        t_c = min(timeit.repeat(lambda: _call(_ckernels, kind, X, signs, p), number=1, repeat=args.repeat))
        out = _call(_ckernels, kind, X, signs, p)
        diff = float(np.max(np.abs(out - ref) / np.maximum(np.abs(ref), 1e-300)))
        print(f"{label:<28}{1e3 * t_py:>12.2f}{1e3 * t_c:>12.2f}{t_py / t_c:>9.1f}{diff:>14.1e}")


if __name__ == "__main__":
    main()
