"""Acceptance checks, one test per criterion.

Each test records a one-line verdict in ``RESULTS``; ``conftest.py`` prints
them after the run.  Tolerances are fixed here and never relaxed to pass.
"""

import math
import time

import numpy as np
import pytest

from smlab.calculus import applicable_engines, apply, relative_error, spectral_apply
from smlab.corpus import windowed_corpus
from smlab.function_spaces import GridFunction, fractional_derivative, hoermander_norm, standard_family
from smlab.function_spaces.partition import bump
from smlab.harness.config import EXPERIMENT_IDS, ExperimentConfig
from smlab.harness.experiments import (
    experiment_defaults,
    jordan_power_slope,
    jordan_wave_profile,
    parse_model,
    run,
    sector_exp_slope,
)
from smlab.operator_models import OperatorFamily, diagonal_model, elementary_family, jordan_model
from smlab.rbound import (
    SearchConfig,
    evaluate_witness,
    rademacher_mean,
    rademacher_stats,
    rbound_lower,
    semi_rbound_lower,
)

RESULTS = {}
MODELS = ["diag:1,2,4", "jordan:1", "circulant:16"]
_RUNS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def run_once(exp_id, seed=0):
    """First run of an experiment at its default config, with its wall time."""
    if exp_id not in _RUNS:
        t0 = time.perf_counter()
        rep = run(ExperimentConfig(exp_id, seed))
        _RUNS[exp_id] = (rep, time.perf_counter() - t0)
    return _RUNS[exp_id]


def rows(rep, check):
    return [r for r in rep.rows if r.check == check]


@pytest.fixture
def single_thread(monkeypatch):
    monkeypatch.setenv("SMLAB_THREADS", "1")


def test_criterion_1_engine_agreement(single_thread):
    cfg = experiment_defaults("E4")
    assert cfg["corpus_size"] >= 50 and cfg["models"] == MODELS
    rep, secs = run_once("E4")
    agree = rows(rep, "engine_agreement")
    worst = max(r.value for r in agree)
    engines = sorted({r.params["engine"] for r in agree})
    ok = len(agree) > 0 and worst < 1e-5 and secs < 60
    record(1, ok, f"worst rel. Frobenius {worst:.2e} (< 1e-5) over {engines}, E4 {secs:.1f} s (< 60 s)")


def test_criterion_2_jordan_imaginary_power_rate():
    slopes = {m: jordan_power_slope(m, np.geomspace(10.0, 1e3, 25)) for m in (1, 2, 3)}
    ok = all(abs(s - m) <= 0.05 for m, s in slopes.items())
    record(2, ok, "slopes " + ", ".join(f"m={m}: {s:.4f}" for m, s in slopes.items()) + " (m +- 0.05)")


def test_criterion_3_jordan_wave_regularization():
    parts = []
    ok = True
    for m in (1, 2, 3):
        _, sup = jordan_wave_profile(m, m, 1e6)
        _, sup_half = jordan_wave_profile(m, m - 0.5, 1e6)
        g, gh = sup[-1] / sup[0], sup_half[-1] / sup_half[0]
        ok &= g < 10 and gh >= 10
        parts.append(f"m={m}: {g:.2f} / {gh:.3g}")
    record(3, ok, "sup growth order m / order m-1/2: " + ", ".join(parts) + " (< 10 / >= 10)")


def test_criterion_4_mihlin_rates():
    slope = sector_exp_slope(alpha=2.0, p=2.0)
    vals = [hoermander_norm(standard_family("bochner_riesz", u=u, exponent=1.5), 1.2, 1.0) for u in (0.25, 1.0, 4.0)]
    spread = (max(vals) - min(vals)) / max(vals)
    ok = 1.8 <= slope <= 2.1 and spread < 1e-3
    record(4, ok, f"SectorExp exponent {slope:.4f} in [1.8, 2.1], BR dilation spread {spread:.2e} (< 1e-3)")


def test_criterion_5_bochner_riesz_reproduction():
    worst, cases = 0.0, 0
    for spec in MODELS:
        A = parse_model(spec)
        for f in windowed_corpus(50, 0):
            if "br" not in applicable_engines(A, f):
                continue
            err = relative_error(apply(A, f, "br").value, spectral_apply(A, f).value, floor=1.0)
            worst, cases = max(worst, err), cases + 1
    # support property: the right-sided derivative of order alpha vanishes past the support
    h = 2**-8
    s = np.arange(round(-40 / h), round(12 / h) + 1) * h
    g = GridFunction(s[0], h, bump(s / 1.5))
    leak = 0.0
    for alpha in (0.5, 1.5, 2.5):
        d = fractional_derivative(g, alpha)
        leak = max(leak, np.max(np.abs(np.asarray(d.samples)[d.grid >= 1.5])) / np.max(np.abs(g.samples)))
    ok = cases > 0 and worst < 1e-5 and leak < 1e-8
    record(5, ok, f"BR vs spectral {worst:.2e} (< 1e-5) on {cases} cases, support leak {leak:.1e} (< 1e-8)")


def _family(mats, p):
    return OperatorFamily("acceptance", tuple((j, np.asarray(M, dtype=complex)) for j, M in enumerate(mats)), p)


def test_criterion_6_rbound_soundness():
    notes, ok = [], True

    # singleton: R({T}) = ||T|| with an exactly known norm
    for T, p, norm in [(np.diag([3.0, -1.0, 2.0]), 3.0, 3.0), (np.array([[0.0, 2.0], [1.0, 0.0]]), 2.0, 2.0)]:
        est = rbound_lower(_family([T], p))
        good = est.lower == est.upper and abs(est.lower - norm) <= 1e-14 * norm
        ok &= good
    notes.append(f"singleton {'exact' if good else 'off'}")

    # Hilbert ambient: R and semi-R against sup ||T_j||
    rng = np.random.default_rng(5)
    mats = [rng.standard_normal((4, 4)) for _ in range(5)]
    sup = max(np.linalg.norm(M, 2) for M in mats)
    F = _family(mats, 2.0)
    r = rbound_lower(F).lower
    semi = semi_rbound_lower(F).lower
    hilbert_ok = abs(r - sup) <= 1e-6 * sup and abs(semi - sup) <= 1e-6 * sup
    ok &= hilbert_ok
    notes.append(f"Hilbert sup {sup:.6f}: R {r:.6f}, semi-R {semi:.6f}")

    # Monte-Carlo vs exhaustive
    rng = np.random.default_rng(3)
    X = rng.standard_normal((10, 6)) + 1j * rng.standard_normal((10, 6))
    exact = rademacher_mean(X, 3.0)
    hits = 0
    for seed in range(100):
        mean, se, _ = rademacher_stats(X, 3.0, samples=100_000, seed=seed, exhaustive_max=0)
        hits += abs(mean - exact) <= 3 * se
    ok &= hits >= 99
    notes.append(f"MC within 3 sigma {hits}/100")

    # scalar contraction under exhaustive evaluation
    G = elementary_family(jordan_model(1, 1.0, 3.0), "imaginary_powers", [1.0, 2.0, 4.0])
    cfg = SearchConfig(tuples=(1, 2), restarts=2)
    base = rbound_lower(G, cfg)
    worst = 0.0
    for a in (2.0, -0.5, 2j):
        aG = OperatorFamily(G.label, tuple((j, a * T) for j, T in zip(G.params, G.matrices)), G.space_p)
        v = evaluate_witness(aG, base.witness)
        worst = max(worst, abs(v - abs(a) * evaluate_witness(G, base.witness)) / v)
        worst = max(worst, abs(rbound_lower(aG, cfg).lower - abs(a) * base.lower) / v)
    ok &= worst <= 1e-12
    notes.append(f"scalar contraction rel. defect {worst:.1e}")
    record(6, ok, "; ".join(notes))


def test_criterion_7_bochner_riesz_echo():
    cfg = experiment_defaults("E5")
    assert cfg["model"] == "circulant:64" and cfg["p"] == 1.5 and cfg["alpha"] == 3.0 and cfg["beta"] == 2.0
    rep, secs = run_once("E5")
    br = rows(rep, "bochner_riesz_family_bounded")[0].value
    ball = rows(rep, "hoermander_ball_family_bounded")[0].value
    ok = br < 10 and ball < 10 and secs < 300
    record(7, ok, f"BR curve max/min {br:.3f}, ball curve max/min {ball:.3f} (< 10), E5 {secs:.1f} s (< 300 s)")


def test_criterion_8_localization_echo():
    rep, _ = run_once("E6")
    vals = [r.value for r in rows(rep, "localized_vs_ball")]
    ok = len(vals) == len(experiment_defaults("E6")["models"]) and all(1 / 4 <= v <= 4 for v in vals)
    record(8, ok, "localized/ball ratios " + ", ".join(f"{v:.3f}" for v in vals) + " (within factor 4)")


def test_criterion_9_determinism():
    same = {}
    for exp_id in EXPERIMENT_IDS:
        first, _ = run_once(exp_id)
        same[exp_id] = first.body() == run(ExperimentConfig(exp_id, 0)).body()
    record(9, all(same.values()), "identical rows: " + ", ".join(f"{k}={'yes' if v else 'NO'}" for k, v in same.items()))
