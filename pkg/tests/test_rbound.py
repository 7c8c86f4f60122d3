import itertools
import math

import numpy as np
import pytest

from smlab.operator_models import OperatorFamily, diagonal_model, elementary_family, jordan_model
from smlab.opnorm import lp_norm, operator_norm
from smlab.rbound import (
    RBoundEstimate,
    SearchConfig,
    evaluate_witness,
    hoermander_ball_family,
    rademacher_mean,
    rademacher_stats,
    rbound_lower,
    semi_rbound_lower,
)


def family(mats, p, label="test"):
    return OperatorFamily(label, tuple((j, np.asarray(M, dtype=complex)) for j, M in enumerate(mats)), p)


def brute_rademacher(X, p):
    K = len(X)
    vals = [lp_norm(np.dot(s, X), p) for s in itertools.product([-1, 1], repeat=K)]
    return float(np.mean(vals))


# -- Rademacher means ---------------------------------------------------------------


def test_rademacher_examples():
    x = np.array([3.0, -4.0])
    assert rademacher_mean([x], 2) == 5.0
    assert abs(rademacher_mean([[1, 0], [0, 1]], 2) - math.sqrt(2)) < 1e-15
    assert rademacher_mean([[1, 0], [0, 1]], 1) == 2.0


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0])
def test_rademacher_exhaustive_matches_brute_force(p):
    rng = np.random.default_rng(1)
    X = rng.standard_normal((7, 5)) + 1j * rng.standard_normal((7, 5))
    assert abs(rademacher_mean(X, p) - brute_rademacher(X, p)) < 1e-12 * brute_rademacher(X, p)


def test_rademacher_hilbert_square_sum_bound():
    # on l^2, (E||.||)^2 <= E||.||^2 = sum ||x_k||^2
    X = np.random.default_rng(2).standard_normal((6, 4))
    assert rademacher_mean(X, 2) ** 2 <= np.sum(X**2) * (1 + 1e-14)


def test_montecarlo_within_three_stderr():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((10, 6)) + 1j * rng.standard_normal((10, 6))
    exact = rademacher_mean(X, 3.0)
    hits = 0
    for seed in range(100):
        mean, se, method = rademacher_stats(X, 3.0, samples=100_000, seed=seed, exhaustive_max=0)
        assert method == "montecarlo" and se > 0
        hits += abs(mean - exact) <= 3 * se
    assert hits >= 99


def test_montecarlo_reproducible():
    X = np.random.default_rng(4).standard_normal((24, 3))
    a = rademacher_stats(X, 1.5, samples=20_000, seed=9)
    b = rademacher_stats(X, 1.5, samples=20_000, seed=9)
    assert a == b and a[2] == "montecarlo"


# -- exact structures ---------------------------------------------------------------------


def test_singleton_exact():
    T = np.array([[1.0, 2.0], [0.0, 1.0]])
    for p in (1.0, 3.0):
        est = rbound_lower(family([T], p))
        assert est.method == "SingletonExact"
        assert abs(est.lower - operator_norm(T, p).lower) < 1e-14
        assert est.lower <= est.upper


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_scalar_identity_family(p):
    F = family([np.eye(3), 2 * np.eye(3)], p)
    est = rbound_lower(F)
    assert abs(est.lower - 2.0) < 1e-12 and abs(est.upper - 2.0) < 1e-12
    assert abs(semi_rbound_lower(F).lower - 2.0) < 1e-12


def test_hilbert_semi_exact_and_search_agree():
    rng = np.random.default_rng(5)
    mats = [rng.standard_normal((4, 4)) for _ in range(5)]
    sup = max(np.linalg.norm(M, 2) for M in mats)
    F = family(mats, 2.0)
    semi = semi_rbound_lower(F)
    assert semi.method == "HilbertExact" and abs(semi.lower - sup) < 1e-12
    searched = semi_rbound_lower(F, SearchConfig(tuples=(1, 2, 4), restarts=2), exact=False)
    assert abs(searched.lower - sup) < 1e-6 * sup


def test_hilbert_rbound_within_kahane_bracket():
    # first-moment averages: sup ||T_j|| <= R <= sqrt(2) sup ||T_j||
    rng = np.random.default_rng(5)
    mats = [rng.standard_normal((4, 4)) for _ in range(5)]
    sup = max(np.linalg.norm(M, 2) for M in mats)
    est = rbound_lower(family(mats, 2.0))
    assert sup * (1 - 1e-12) <= est.lower <= math.sqrt(2) * sup
    assert abs(est.upper - math.sqrt(2) * sup) < 1e-12 * sup


def test_complex_scalar_family_exceeds_sup():
    # x = (1, 1), coefficients (1, i): E|1 +- i| / E|1 +- 1| = sqrt(2)
    F = family([np.eye(1), 1j * np.eye(1)], 1.0)
    est = rbound_lower(F)
    assert est.method != "SingletonExact"
    assert est.lower >= math.sqrt(2) - 1e-12
    assert abs(semi_rbound_lower(F).lower - 1.0) < 1e-12


# -- search -----------------------------------------------------------------------------------


def _brute_projection_optimum():
    # projections diag(1,0), diag(0,1) on l^1_2: every member choice, real unit vectors on a grid
    angles = np.linspace(0, 2 * np.pi, 25, endpoint=False)
    grid = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    grid /= lp_norm(grid, 1, axis=1)[:, None]
    P = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    best = 1.0
    for K in (2, 3):
        for idx in itertools.product(range(2), repeat=K):
            for sel in itertools.product(range(0, 25, 2), repeat=K):
                X = grid[list(sel)]
                TX = np.stack([P[j] @ x for j, x in zip(idx, X)])
                best = max(best, brute_rademacher(TX, 1) / brute_rademacher(X, 1))
    return best


def test_projection_family_reaches_brute_force_optimum():
    F = family([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], 1.0)
    est = rbound_lower(F)
    assert est.lower >= _brute_projection_optimum() - 1e-9


def _nontrivial_family(p=3.0):
    A = jordan_model(1, 1.0, p)
    return elementary_family(A, "imaginary_powers", [0.5, 1.0, 2.0, 4.0])


def test_lower_at_least_member_norms_and_witness_reproduces():
    F = _nontrivial_family()
    est = rbound_lower(F)
    norms = [operator_norm(T, F.space_p).lower for T in F.matrices]
    assert est.lower >= max(norms) * (1 - 1e-12)
    assert abs(evaluate_witness(F, est.witness) - est.lower) <= 1e-10 * est.lower
    semi = semi_rbound_lower(F)
    assert abs(evaluate_witness(F, semi.witness) - semi.lower) <= 1e-10 * semi.lower


def test_search_is_deterministic():
    F = _nontrivial_family()
    a = rbound_lower(F, SearchConfig(seed=11))
    b = rbound_lower(F, SearchConfig(seed=11))
    assert a.lower == b.lower
    assert np.array_equal(a.witness["vectors"], b.witness["vectors"])


def test_search_independent_of_thread_count(monkeypatch):
    F = _nontrivial_family()
    monkeypatch.setenv("SMLAB_THREADS", "1")
    a = rbound_lower(F, SearchConfig(tuples=(1, 2), restarts=3))
    monkeypatch.setenv("SMLAB_THREADS", "4")
    b = rbound_lower(F, SearchConfig(tuples=(1, 2), restarts=3))
    assert a.lower == b.lower


def test_semi_below_r():
    for p in (1.0, 1.5, 3.0):
        F = _nontrivial_family(p)
        assert semi_rbound_lower(F).lower <= rbound_lower(F).lower
    F = family([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], 1.0)
    assert semi_rbound_lower(F).lower <= rbound_lower(F).lower


def test_monotone_under_union_with_warm_start():
    F1 = _nontrivial_family()
    F2 = elementary_family(jordan_model(1, 1.0, 3.0), "imaginary_powers", [8.0, 0.25])
    cfg = SearchConfig(tuples=(1, 2), restarts=2)
    e1 = rbound_lower(F1, cfg)
    e12 = rbound_lower(F1.union(F2), cfg, warm_starts=[e1.witness])
    assert e12.lower >= e1.lower


@pytest.mark.parametrize("a", [2.0, -0.5, 2j])
def test_scalar_contraction(a):
    F = _nontrivial_family()
    G = family([a * T for T in F.matrices], F.space_p)
    cfg = SearchConfig(tuples=(1, 2), restarts=2)
    eF, eG = rbound_lower(F, cfg), rbound_lower(G, cfg)
    assert abs(eG.lower - abs(a) * eF.lower) <= 1e-12 * eG.lower
    assert np.array_equal(eF.witness["indices"], eG.witness["indices"])
    assert np.allclose(eF.witness["vectors"], eG.witness["vectors"], rtol=0, atol=1e-12)


def test_estimate_json_roundtrip():
    F = _nontrivial_family()
    est = rbound_lower(F, SearchConfig(tuples=(1, 2), restarts=1))
    back = RBoundEstimate.from_json(est.to_json())
    assert back.lower == est.lower and back.method == est.method
    assert abs(evaluate_witness(F, back.witness) - est.lower) <= 1e-10 * est.lower
    assert SearchConfig.from_dict(back.config) == SearchConfig(tuples=(1, 2), restarts=1)


# -- Hoermander-ball families ------------------------------------------------------------------


def test_ball_singleton_norm_below_rbound():
    A = diagonal_model([0.5, 1.0, 3.0], 1.5)
    F = hoermander_ball_family(A, alpha=1.0, p=2.0, corpus_size=1, seed=2)
    assert len(F) == 1
    est = rbound_lower(F)
    assert operator_norm(F.matrices[0], 1.5).lower <= est.lower * (1 + 1e-12)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_ball_scalar_values_bounded_by_embedding(alpha):
    # sup|g| <= (int (1+|xi|)^(-2 alpha) dxi)^(1/2) ||g||_{W^alpha_2} under either Fourier convention,
    # and f(1) is the value of the single window centred at 0
    bound = math.sqrt(2.0 / (2 * alpha - 1))
    F = hoermander_ball_family(diagonal_model([1.0]), alpha, 2.0, corpus_size=12, seed=0, dyadic_range=(-1, 1))
    vals = np.abs([T[0, 0] for T in F.matrices])
    assert np.all(vals <= bound)
    assert np.any(vals > 0)


def test_ball_dilation_stability():
    A = diagonal_model([0.5, 1.0, 2.0, 3.0])
    F = hoermander_ball_family(A, 1.0, 2.0, corpus_size=6, seed=4)
    G = hoermander_ball_family(A.scaled(2.0), 1.0, 2.0, corpus_size=6, seed=4)
    for (_, X), (_, Y) in zip(F.members, G.members):
        assert np.allclose(X, Y, rtol=0, atol=1e-12)
