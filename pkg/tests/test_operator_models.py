import math

import numpy as np
import pytest

from smlab.calculus import spectral_apply
from smlab.errors import CertificateError, ParameterError, SpectrumError
from smlab.function_spaces import constant, standard_family
from smlab.operator_models import (
    OperatorFamily,
    OperatorModel,
    certify_sectoriality,
    circulant_laplacian,
    diagonal_model,
    elementary_family,
    general_model,
    jordan_model,
)
from smlab.opnorm import lp_norm, operator_norm


def rel(X, Y):
    return np.linalg.norm(X - Y) / np.linalg.norm(Y)


def scalar_sector_bound(theta):
    # sup_r |r e^{i theta}| / |r e^{i theta} - 1|
    return 1.0 / math.sin(theta) if theta <= math.pi / 2 else 1.0


# -- constructors -------------------------------------------------------------


def test_diagonal_examples():
    A = diagonal_model([1.0])
    assert A.matrix.shape == (1, 1) and A.matrix[0, 0] == 1
    B = diagonal_model([1, 2, 4])
    out = spectral_apply(B, standard_family("sector_exp", theta=0.0)).value
    assert np.allclose(out, np.diag(np.exp([-1.0, -2.0, -4.0])), atol=1e-15)
    with pytest.raises(SpectrumError):
        diagonal_model([1, -1])


def test_jordan_examples():
    assert np.array_equal(jordan_model(1).matrix, [[1, 1], [0, 1]])
    assert np.array_equal(jordan_model(2).matrix, [[1, 1, 0.5], [0, 1, 1], [0, 0, 1]])
    t = 3.7
    assert np.allclose(jordan_model(1).imaginary_power(t), [[1, 1j * t], [0, 1]], atol=1e-14)
    with pytest.raises(ParameterError):
        jordan_model(0)


def test_jordan_with_eigenvalue_is_scaled_exponential():
    A = jordan_model(3, 2.5)
    B = np.diag(np.ones(3), 1)
    from scipy.linalg import expm

    assert np.allclose(A.matrix, 2.5 * expm(B), atol=1e-14)


@pytest.mark.parametrize("N,symbol", [(4, [2.0, 4.0, 2.0]), (3, [3.0, 3.0])])
def test_circulant_laplacian_symbols(N, symbol):
    A = circulant_laplacian(N)
    assert np.allclose(A.eigenvalues, symbol, atol=1e-14)
    assert A.dim == N - 1
    S = np.roll(np.eye(N), 1, axis=0)
    assert np.allclose(A.matrix, 2 * np.eye(N) - S - S.T)


def test_circulant_constant_function_is_identity_on_model_space():
    A = circulant_laplacian(9)
    P = spectral_apply(A, constant(1.0)).value
    x = np.random.default_rng(0).standard_normal(9)
    x -= x.mean()
    assert np.allclose(P @ x, x, atol=1e-13)
    assert np.allclose(P @ np.ones(9), 0, atol=1e-13)
    assert np.allclose(P, A.identity())


def test_general_model_spectrum_check():
    general_model([[2.0, 1.0], [0.0, 3.0]])
    with pytest.raises(SpectrumError):
        general_model([[0.0, 1.0], [-1.0, 0.0]])


def test_resolvent_in_spectrum():
    with pytest.raises(CertificateError):
        diagonal_model([1, 2]).resolvent(2.0)
    with pytest.raises(CertificateError):
        jordan_model(1).resolvent(1.0)


# -- algebraic laws -------------------------------------------------------------

MODELS = [
    diagonal_model([0.3, 1.0, 2.0, 5.0]),
    jordan_model(1),
    jordan_model(3, 0.7),
    circulant_laplacian(7),
    general_model([[1.0, 0.5, 0.0], [0.0, 2.0, 0.3], [0.1, 0.0, 3.0]]),
]


@pytest.mark.parametrize("A", MODELS, ids=lambda A: f"{A.structure}{A.n}")
def test_semigroup_law(A):
    z1, z2 = 0.4 + 0.3j, 1.1 - 0.8j
    lhs = A.semigroup(z1) @ A.semigroup(z2)
    assert rel(lhs, A.semigroup(z1 + z2)) < 1e-10


@pytest.mark.parametrize("A", MODELS, ids=lambda A: f"{A.structure}{A.n}")
def test_imaginary_power_group_law(A):
    t, s = 2.3, -5.1
    lhs = A.imaginary_power(t) @ A.imaginary_power(s)
    assert rel(lhs, A.imaginary_power(t + s)) < 1e-10


@pytest.mark.parametrize("A", MODELS, ids=lambda A: f"{A.structure}{A.n}")
def test_wave_group_law_and_combination(A):
    assert rel(A.group(1.5) @ A.group(-0.4), A.group(1.1)) < 1e-10
    ts = np.array([-1.0, 0.5, 2.0])
    cs = np.array([0.3, 1.0 - 1j, 0.2j])
    direct = sum(c * A.group(t) for t, c in zip(ts, cs))
    assert rel(A.fourier_combination(ts, cs, "group"), direct) < 1e-10
    direct = sum(c * A.imaginary_power(t) for t, c in zip(ts, cs))
    assert rel(A.fourier_combination(ts, cs, "power"), direct) < 1e-10


@pytest.mark.parametrize("m", [1, 2, 3])
def test_jordan_imaginary_power_growth(m):
    A = jordan_model(m)
    ts = np.geomspace(10, 1e3, 25)
    norms = [np.linalg.norm(A.imaginary_power(t), 2) for t in ts]
    slope = np.polyfit(np.log(ts), np.log(norms), 1)[0]
    assert abs(slope - m) < 0.05


@pytest.mark.parametrize("m", [1, 2, 3])
def test_jordan_regularized_wave_is_bounded(m):
    A = jordan_model(m)
    ss = 2.0 ** np.arange(-10, 21)  # up to about 1e6
    norms = [
        np.linalg.norm(spectral_apply(A, standard_family("wave_regularized", s=s, alpha=m)).value, 2)
        for s in ss
    ]
    assert max(norms) < 2.0
    # the large-s values settle instead of growing
    assert norms[-1] <= 1.01 * norms[-5]


# -- certificates -------------------------------------------------------------------


def test_certificate_scalar_oracle():
    angles = [math.pi / 4, math.pi / 2, 3 * math.pi / 4]
    cert = certify_sectoriality(diagonal_model([1.0]), angles=angles)
    for th, b in zip(angles, cert.bounds):
        assert abs(b / scalar_sector_bound(th) - 1) < 0.01
    assert abs(cert.bounds[0] - math.sqrt(2)) < 1e-6


@pytest.mark.parametrize("p", [2.0, 3.0, 1.0])
def test_certificate_diagonal_matches_oracle(p):
    angles = [math.pi / 8, math.pi / 3, 2 * math.pi / 3]
    cert = certify_sectoriality(diagonal_model([0.5, 1.0, 7.0], p), angles=angles)
    for th, b in zip(angles, cert.bounds):
        assert abs(b / scalar_sector_bound(th) - 1) < 0.01
    if cert.upper_bounds is not None:
        assert all(u >= b for u, b in zip(cert.upper_bounds, cert.bounds))


def test_certificate_monotone_and_jordan_growth():
    cert = certify_sectoriality(diagonal_model([1, 3]), angles=[math.pi / 2, 3 * math.pi / 4])
    assert cert.bounds[1] <= cert.bounds[0]
    angles = math.pi * np.array([1 / 32, 1 / 16, 1 / 8, 1 / 4, 1 / 2])
    cert = certify_sectoriality(jordan_model(1), angles=angles)
    b = np.array(cert.bounds)
    assert np.all(np.isfinite(b))
    assert np.all(np.diff(b) < 0)  # grows as the angle shrinks
    assert cert.bound(math.pi / 3) == cert.bounds[3]


def test_certificate_parameter_checks():
    with pytest.raises(ParameterError):
        certify_sectoriality(diagonal_model([1.0]), angles=[0.0])
    with pytest.raises(ParameterError):
        certify_sectoriality(diagonal_model([1.0]), boundary_samples=10)


def test_hinf_probe_diagonal_is_one():
    cert = certify_sectoriality(diagonal_model([1, 2]), angles=[math.pi / 2], hinf_sigma=math.pi / 4)
    assert abs(cert.hinf_bound - 1.0) < 1e-2


# -- families -------------------------------------------------------------------------


def test_family_examples():
    F = elementary_family(diagonal_model([1.0]), "semigroup", [(1.0, 0.0)])
    assert abs(F.matrices[0][0, 0] - math.exp(-1)) < 1e-15
    F = elementary_family(jordan_model(1), "imaginary_powers", [10.0])
    assert np.allclose(F.matrices[0], [[1, 10j], [0, 1]], atol=1e-13)
    assert abs(np.linalg.norm(F.matrices[0], 2) - (10 + math.sqrt(104)) / 2) < 1e-12
    F = elementary_family(diagonal_model([1, 2, 4]), "bochner_riesz", [3.0], exponent=1)
    assert np.allclose(F.matrices[0], np.diag([2 / 3, 1 / 3, 0]), atol=1e-15)


def test_family_prefactors_and_order():
    A = diagonal_model([1.0, 2.0])
    F = elementary_family(A, "imaginary_powers", [-2.0, 0.0, 3.0], alpha=1.0)
    assert F.params == [-2.0, 0.0, 3.0]
    assert np.allclose(F.matrices[2], np.diag(np.exp(3j * np.log([1.0, 2.0]))) / 4)
    F = elementary_family(A, "semigroup", [(2.0, 0.5)], alpha=2.0)
    expected = (math.pi / 2 - 0.5) ** 2 * np.diag(np.exp(-2 * np.exp(0.5j) * np.array([1.0, 2.0])))
    assert np.allclose(F.matrices[0], expected)
    F = elementary_family(A, "wave", [0.5], alpha=1.0)
    lam = np.array([1.0, 2.0])
    assert np.allclose(F.matrices[0], np.diag(np.exp(0.5j * lam) / (1 + 0.5 * lam)))


def test_family_json_roundtrip():
    F = elementary_family(jordan_model(1), "imaginary_powers", [1.0, 2.0])
    G = OperatorFamily.from_json(F.to_json())
    assert np.allclose(G.matrices, F.matrices)
    assert G.params == F.params and G.space_p == F.space_p
    U = F.union(G)
    assert len(U) == 4


def test_model_json_roundtrip():
    for A in MODELS:
        B = OperatorModel.from_json(A.in_space(3.0).to_json())
        assert B.structure == A.structure and B.space_p == 3.0
        assert np.array_equal(B.matrix, A.matrix)
        assert np.allclose(B.eigenvalues, A.eigenvalues)


# -- operator norms ----------------------------------------------------------------------


def test_exact_norms():
    T = np.array([[1.0, -2.0], [3.0, 0.5]])
    assert operator_norm(T, 1).lower == 4.0
    assert operator_norm(T, np.inf).lower == 3.5
    assert abs(operator_norm(T, 2).lower - np.linalg.svd(T, compute_uv=False)[0]) < 1e-14
    assert operator_norm(T, 2).exact


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_lp_bracket_beats_random_search(p):
    rng = np.random.default_rng(7)
    T = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    b = operator_norm(T, p)
    X = rng.standard_normal((5, 50000)) + 1j * rng.standard_normal((5, 50000))
    sampled = np.max(lp_norm(T @ X, p, axis=0) / lp_norm(X, p, axis=0))
    assert sampled <= b.lower * (1 + 1e-12) <= b.upper * (1 + 1e-12)
    w = b.witness
    assert abs(lp_norm(T @ w, p) / lp_norm(w, p) - b.lower) < 1e-12 * b.lower


def test_diagonal_lp_norm_exact_bracket():
    b = operator_norm(np.diag([1.0, -3.0, 2.0j]), 1.7)
    assert abs(b.lower - 3.0) < 1e-12 and abs(b.upper - 3.0) < 1e-12
