"""Experiments E1-E7: config-driven checks that return a :class:`Report`."""

import math

import numpy as np

from ..calculus import applicable_engines, apply, engine_kwargs, relative_error, spectral_apply
from ..corpus import windowed_corpus
from ..errors import ConfigError, SMLabError
from ..function_spaces import (
    DEFAULT_SPACING,
    GridFunction,
    hoermander_norm,
    sobolev_norm,
    standard_family,
    windowed_smooth,
)
from ..kernels import BACKEND
from ..operator_models import (
    OperatorFamily,
    circulant_laplacian,
    diagonal_model,
    elementary_family,
    jordan_model,
)
from ..opnorm import operator_norm
from ..parallel import thread_count
from ..rbound import SearchConfig, hoermander_ball_family, rbound_lower
from .report import Report

AGREEMENT_TOL = 1e-5


# -- shared helpers -----------------------------------------------------------------------


def fit_slope(x, y, decades=2.0):
    """Least-squares slope of ``log y`` against ``log x`` over the top ``decades`` of ``x``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    keep = x >= x.max() / 10.0**decades
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def parse_model(text, space_p=2.0):
    """Model from a short string: ``diag:1,2,4``, ``jordan:m[,mu]``, ``circulant:N[,scale]``."""
    try:
        kind, _, args = str(text).partition(":")
        vals = [float(v) for v in args.split(",") if v.strip()]
        kind = kind.strip().lower()
        if kind == "diag":
            return diagonal_model(vals, space_p)
        if kind == "jordan":
            return jordan_model(int(vals[0]), vals[1] if len(vals) > 1 else 1.0, space_p)
        if kind == "circulant":
            A = circulant_laplacian(int(vals[0]), space_p)
            return A.scaled(vals[1]) if len(vals) > 1 else A
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad model spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown model kind in {text!r}")


def _search(cfg):
    return SearchConfig(
        tuples=tuple(cfg["tuples"]),
        restarts=int(cfg["restarts"]),
        iterations=int(cfg["iterations"]),
        seed=int(cfg["seed"]),
    )


def _ratio(vals):
    vals = np.asarray(vals, float)
    return float(vals.max() / vals.min())


def _nested_lower_bounds(family, sizes, search):
    """Lower bounds of the prefixes of ``family``; each search is warm-started from the last witness."""
    out, warm = [], []
    for n in sizes:
        sub = OperatorFamily(family.label, family.members[:n], family.space_p)
        est = rbound_lower(sub, search, warm_starts=warm)
        out.append(est.lower)
        if est.witness is not None and est.witness.get("kind") == "r":
            warm = [est.witness]
    return out


# -- E1: Hoermander norm rates ---------------------------------------------------------------


def _sector_exp_norm(delta, alpha, p):
    # the window sup sits near e^tau = alpha / delta; the grid resolves the
    # oscillation frequency e^s up to 2.5 units beyond that point
    peak = math.log(max(alpha, 0.25) / delta)
    k = max(7, math.ceil(math.log2(math.log(2.0) * math.exp(peak + 2.5) * 4 / (2 * math.pi))))
    h = math.log(2.0) / 2**k
    f = standard_family("sector_exp", theta=math.pi / 2 - delta)
    return hoermander_norm(f, alpha, p, s_range=(peak - 1.5, peak + 1.5), spacing=h, chunk=4)


def sector_exp_slope(alpha=2.0, p=2.0, deltas=None):
    """Fitted exponent of ``||SectorExp(pi/2 - delta)||_{H^alpha_p}`` against ``1/delta``."""
    deltas = np.geomspace(1e-3, 1e-1, 9) if deltas is None else np.asarray(deltas, float)
    vals = [_sector_exp_norm(d, alpha, p) for d in deltas]
    return fit_slope(1.0 / deltas, vals)


def _e1(cfg, rep):
    alpha, p = float(cfg["alpha"]), float(cfg["p"])
    slope = sector_exp_slope(alpha, p)
    rep.add(
        "sector_exp_rate",
        "H^alpha_p norm of exp(-e^{i theta} lam) grows like (pi/2 - |theta|)^-alpha",
        {"alpha": alpha, "p": p, "delta": [1e-3, 1e-1]},
        slope,
        f"[{alpha - 0.2}, {alpha + 0.1}]",
        alpha - 0.2 <= slope <= alpha + 0.1,
    )

    e, beta, bp = float(cfg["br_exponent"]), float(cfg["br_beta"]), float(cfg["br_p"])
    us = [0.25, 1.0, 4.0]
    vals = [hoermander_norm(standard_family("bochner_riesz", u=u, exponent=e), beta, bp) for u in us]
    spread = (max(vals) - min(vals)) / max(vals)
    rep.add(
        "bochner_riesz_dilation",
        "Hoermander norms are invariant under dilations",
        {"exponent": e, "beta": beta, "p": bp, "u": us},
        spread,
        "< 1e-3",
        spread < 1e-3,
    )

    wa = float(cfg["wave_alpha"])
    vals = []
    for k in range(-4, 5):
        s = 2.0**k
        top = math.log(48.0 / s)
        f = standard_family("wave_regularized", s=s, alpha=wa)
        vals.append(hoermander_norm(f, wa, 2.0, s_range=(top - 14.0, top)))
    rep.add(
        "wave_regularized_uniform",
        "(1+|s|lam)^-alpha e^{is lam} has H^alpha_2 norm bounded uniformly in s",
        {"alpha": wa, "s": "2^-4..2^4"},
        _ratio(vals),
        "max/min < 1.05",
        _ratio(vals) < 1.05,
    )

    ia = float(cfg["ip_alpha"])
    ts = [10.0, 100.0]
    vals = [hoermander_norm(standard_family("imaginary_power", t=t), ia, 2.0, s_range=(-1, 1)) for t in ts]
    rate = math.log(vals[1] / vals[0]) / math.log(10.0)
    rep.add(
        "imaginary_power_rate",
        "H^alpha_2 norm of lam^{it} grows like |t|^alpha",
        {"alpha": ia, "t": ts},
        rate,
        f"[{ia - 0.2}, {ia + 0.2}]",
        abs(rate - ia) <= 0.2,
    )


# -- E2: Jordan optimality -----------------------------------------------------------------------


def jordan_power_slope(m, ts=None):
    ts = np.geomspace(10.0, 1e3, 25) if ts is None else ts
    A = jordan_model(m)
    norms = [np.linalg.norm(A.imaginary_power(t), 2) for t in ts]
    return fit_slope(ts, norms)


def jordan_wave_profile(m, order, s_max=1e6):
    """Running sup over dyadic ``s <= s_max`` of ``||(1+sA)^-order e^{isA}||`` for ``jordan_model(m)``."""
    A = jordan_model(m)
    ss = 2.0 ** np.arange(-10, math.floor(math.log2(s_max)) + 1)
    norms = [np.linalg.norm(spectral_apply(A, standard_family("wave_regularized", s=s, alpha=order)).value, 2) for s in ss]
    return ss, np.maximum.accumulate(norms)


def _e2(cfg, rep):
    search = _search(cfg)
    for m in cfg["m"]:
        m = int(m)
        slope = jordan_power_slope(m)
        rep.add(
            "jordan_imaginary_power_slope",
            "||A^{it}|| ~ <t>^m for a Jordan block of size m+1",
            {"m": m, "t": [10.0, 1e3]},
            slope,
            f"{m} +- 0.05",
            abs(slope - m) <= 0.05,
        )
        _, sup = jordan_wave_profile(m, m)
        rep.add(
            "jordan_wave_bounded",
            "(1+|s|A)^-m e^{isA} is uniformly bounded for a Jordan block of size m+1",
            {"m": m, "order": m, "s_max": 1e6},
            float(sup[-1] / sup[0]),
            "sup growth < 10",
            sup[-1] / sup[0] < 10,
        )
        _, sup = jordan_wave_profile(m, m - 0.5)
        rep.add(
            "jordan_wave_order_sharp",
            "order m - 1/2 regularization does not bound the Jordan wave group",
            {"m": m, "order": m - 0.5, "s_max": 1e6},
            float(sup[-1] / sup[0]),
            "sup growth >= 10",
            sup[-1] / sup[0] >= 10,
        )
        lows = {}
        for beta in (m + 0.6, m + 0.4):
            F = hoermander_ball_family(jordan_model(m), beta, 2.0, int(cfg["corpus_size"]), int(cfg["seed"]))
            lows[beta] = rbound_lower(F, search).lower
        ratio = lows[m + 0.4] / lows[m + 0.6]
        params = {"m": m, "beta": [m + 0.6, m + 0.4], "corpus_size": int(cfg["corpus_size"]), "lower": list(lows.values())}
        rep.add(
            "jordan_ball_divergence",
            "Hoermander-ball lower bound grows >= 10x as beta decreases from m+0.6 to m+0.4",
            params,
            ratio,
            ">= 10",
            ratio >= 10,
        )
        rep.add(
            "jordan_ball_monotone",
            "Hoermander-ball lower bound increases as the smoothness order decreases",
            params,
            ratio,
            "> 1",
            ratio > 1,
        )


# -- E3: Laplacian multipliers ------------------------------------------------------------------


def _e3(cfg, rep):
    beta = float(cfg["beta"])
    for p in cfg["p"]:
        p = float(p)
        sups = []
        for N in cfg["N"]:
            A = circulant_laplacian(int(N), p)
            F = hoermander_ball_family(A, beta, 2.0, int(cfg["corpus_size"]), int(cfg["seed"]))
            sup = max(operator_norm(T, p).lower for T in F.matrices)
            sups.append(sup)
            rep.add(
                "laplacian_multiplier_norm",
                "sup ||f(L)||_p over the H^beta_2 unit-ball corpus",
                {"N": int(N), "p": p, "beta": beta},
                sup,
                "finite",
                bool(np.isfinite(sup)),
            )
        r = _ratio(sups)
        rep.add(
            "laplacian_multiplier_stable_in_N",
            "multiplier bound of the discrete Laplacian does not grow with N",
            {"N": [int(N) for N in cfg["N"]], "p": p, "beta": beta},
            r,
            f"max/min < {cfg['stability_factor']}",
            r < float(cfg["stability_factor"]),
        )


# -- E4: engine cross-validation --------------------------------------------------------------------


def _e4(cfg, rep):
    corpus = windowed_corpus(int(cfg["corpus_size"]), int(cfg["seed"]))
    for spec in cfg["models"]:
        A = parse_model(spec)
        worst = {}
        for f in corpus:
            ref = spectral_apply(A, f).value
            for engine in applicable_engines(A, f):
                if engine == "spectral":
                    continue
                err = relative_error(apply(A, f, engine).value, ref, floor=1.0)
                worst[engine] = max(worst.get(engine, 0.0), err)
        for engine, err in worst.items():
            rep.add(
                "engine_agreement",
                "every applicable engine reproduces the spectral oracle",
                {"model": spec, "engine": engine, "corpus_size": len(corpus)},
                err,
                f"< {AGREEMENT_TOL}",
                err < AGREEMENT_TOL,
            )
        # refinement table: twice-default to default step on the first few multipliers
        for engine in ("cauchy", "wave", "mellin", "br"):
            pairs = []
            for f in corpus[: int(cfg["refinement_size"])]:
                if engine not in applicable_engines(A, f):
                    continue
                ref = spectral_apply(A, f).value
                d = [relative_error(apply(A, f, engine, **engine_kwargs(engine, f, s)).value, ref, floor=1.0) for s in (2.0, 1.0)]
                pairs.append(d)
            if not pairs:
                continue
            ok = all(d2 <= d1 / 2 or d2 < 1e-8 for d1, d2 in pairs)
            rep.add(
                "engine_refinement",
                "halving the step from twice the default reduces the error (or it is at roundoff)",
                {"model": spec, "engine": engine, "cases": len(pairs)},
                [max(d[0] for d in pairs), max(d[1] for d in pairs)],
                "d(h) <= d(2h)/2 or < 1e-8",
                ok,
            )


# -- E5: Bochner-Riesz equivalence -----------------------------------------------------------------


def _e5(cfg, rep):
    p = float(cfg["p"])
    A = parse_model(cfg["model"], p)
    alpha, beta = float(cfg["alpha"]), float(cfg["beta"])
    search = _search(cfg)
    lo, hi = A.spectral_range
    # largest u first: R_u -> I as u grows, smaller u are the demanding members
    us = np.geomspace(2 * hi, lo, int(cfg["br_points"]))
    sizes = [int(n) for n in cfg["sizes"]]
    br_sizes = [max(1, round(len(us) * n / sizes[-1])) for n in sizes]

    br = elementary_family(A, "bochner_riesz", us, alpha=alpha)
    br_curve = _nested_lower_bounds(br, br_sizes, search)
    rep.add(
        "bochner_riesz_family_bounded",
        "{R_u^{alpha-1}(A)} stays R-bounded as the u-grid grows",
        {"alpha": alpha, "p": p, "sizes": br_sizes, "curve": br_curve},
        _ratio(br_curve),
        "max/min < 10",
        _ratio(br_curve) < 10,
    )
    ball = hoermander_ball_family(A, beta, 1.0, sizes[-1], int(cfg["seed"]))
    ball_curve = _nested_lower_bounds(ball, sizes, search)
    rep.add(
        "hoermander_ball_family_bounded",
        "{f(A) : ||f||_{H^beta_1} <= 1} stays R-bounded as the corpus grows",
        {"beta": beta, "p": p, "sizes": sizes, "curve": ball_curve},
        _ratio(ball_curve),
        "max/min < 10",
        _ratio(ball_curve) < 10,
    )
    # R_u^{alpha-1} / ||R_1^{alpha-1}||_{H^beta_1} lies in the H^beta_1 unit ball for beta < alpha
    scale = hoermander_norm(standard_family("bochner_riesz", u=1.0, exponent=alpha - 1.0), beta, 1.0)
    joint = ball.union(br.scaled(1.0 / scale))
    joint_low = _nested_lower_bounds(joint, [len(ball), len(joint)], search)[-1]
    r = joint_low / ball_curve[-1]
    rep.add(
        "bochner_riesz_inside_ball",
        "normalized Bochner-Riesz means belong to the H^beta_1 ball without raising its R-bound",
        {"alpha": alpha, "beta": beta, "br_norm": scale, "ball": ball_curve[-1], "joint": joint_low},
        r,
        "< 10",
        r < 10,
    )
    nu = alpha + float(cfg["nu_offset"])
    brn = elementary_family(A, "bochner_riesz", us, alpha=nu)
    curve = _nested_lower_bounds(brn, br_sizes, search)
    rep.add(
        "bochner_riesz_higher_order_bounded",
        "{R_u^{nu-1}(A)} stays R-bounded for nu > alpha",
        {"nu": nu, "p": p, "curve": curve},
        _ratio(curve),
        "max/min < 10",
        _ratio(curve) < 10,
    )

    deltas = np.geomspace(float(cfg["delta_min"]), 1.0, int(cfg["delta_points"]))
    ts = np.geomspace(0.1 / hi, 10.0 / lo, 8)
    lows = []
    for d in deltas:
        fam = elementary_family(A, "semigroup", [(t, math.pi / 2 - d) for t in ts])
        lows.append(rbound_lower(fam, search).lower)
    gamma = fit_slope(1.0 / deltas, lows)
    rep.add(
        "semigroup_angle_exponent",
        "R-bound of {e^{-zA}: arg z = theta} grows at most like (pi/2-|theta|)^-alpha",
        {"alpha": alpha, "p": p, "delta": [float(deltas[0]), 1.0], "lower": lows},
        gamma,
        f"<= {alpha} + 0.1",
        gamma <= alpha + 0.1,
    )


# -- E6: localization ----------------------------------------------------------------------------


def localized_family(A, alpha, p, corpus_size, seed, terms=4):
    """``{f(2^n A)}`` for random ``f`` supported in ``[1/2, 2]`` with ``||f(e^.)||_{W^alpha_p} = 1``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 6])))
    lo, hi = A.spectral_range
    ns = range(math.floor(math.log2(lo)) - 1, math.ceil(math.log2(hi)) + 2)
    half = math.log(2.0)
    h = DEFAULT_SPACING
    s = h * np.arange(-256, 257)  # [-2 ln 2, 2 ln 2]
    members = []
    for j in range(int(corpus_size)):
        coeffs = rng.standard_normal((terms, 2)) / (1.0 + np.arange(terms))[:, None]
        f = windowed_smooth(0.0, half, coeffs, "bump")
        norm = sobolev_norm(GridFunction(s[0], h, f.log_values(s)), alpha, p)
        for n in ns:
            members.append(((j, n), spectral_apply(A, f.dilate(2.0**n)).value / norm))
    return OperatorFamily(f"localized(alpha={alpha}, p={p})", tuple(members), A.space_p)


def _e6(cfg, rep):
    alpha, norm_p = float(cfg["alpha"]), float(cfg["norm_p"])
    search = _search(cfg)
    factor = float(cfg["factor"])
    for spec in cfg["models"]:
        A = parse_model(spec, float(cfg["p"]))
        loc = rbound_lower(localized_family(A, alpha, norm_p, int(cfg["corpus_size"]), int(cfg["seed"])), search).lower
        ball = rbound_lower(hoermander_ball_family(A, alpha, norm_p, int(cfg["corpus_size"]), int(cfg["seed"])), search).lower
        r = loc / ball
        rep.add(
            "localized_vs_ball",
            "dyadically localized and global Hoermander-ball R-bounds are equivalent",
            {"model": spec, "p": float(cfg["p"]), "alpha": alpha, "localized": loc, "ball": ball},
            r,
            f"in [1/{factor}, {factor}]",
            1 / factor <= r <= factor,
        )


# -- E7: analytic improvement -----------------------------------------------------------------------


def _e7(cfg, rep):
    search = _search(cfg)
    delta = float(cfg["delta"])
    eps_grid = [float(e) for e in cfg["eps"]]
    for spec, growth in zip(cfg["models"], cfg["growth"]):
        A = parse_model(spec, float(cfg["p"]))
        a = float(growth) + delta
        lows = []
        for eps in eps_grid:
            ys = eps * np.geomspace(1e-1, 1e4, int(cfg["points"]))
            zs = [eps + 0j] + [eps + 1j * y for y in ys] + [eps - 1j * y for y in ys]
            members = tuple((z, (eps / abs(z)) ** a * A.semigroup(z)) for z in zs)
            lows.append(rbound_lower(OperatorFamily("analytic", members, A.space_p), search).lower)
        r = _ratio(lows)
        rep.add(
            "analytic_family_bounded",
            "{(Re z/|z|)^{alpha+delta} e^{-zA} : Re z = eps} is R-bounded uniformly in eps",
            {"model": spec, "p": float(cfg["p"]), "alpha": float(growth), "delta": delta, "eps": eps_grid, "lower": lows},
            r,
            "max/min < 10",
            r < 10,
        )


# -- registry ---------------------------------------------------------------------------------------

SEARCH_DEFAULTS = {"tuples": [1, 2, 4, 8], "restarts": 4, "iterations": 60}

REGISTRY = {
    "E1": (_e1, {"alpha": 2.0, "p": 2.0, "br_exponent": 1.5, "br_beta": 1.2, "br_p": 1.0, "wave_alpha": 1.5, "ip_alpha": 1.0}),
    "E2": (_e2, {"m": [1, 2, 3], "corpus_size": 8, **SEARCH_DEFAULTS, "tuples": [1, 2, 4]}),
    "E3": (_e3, {"N": [16, 64, 256], "p": [1.5, 2.0, 4.0], "beta": 1.0, "corpus_size": 12, "stability_factor": 2.0}),
    "E4": (_e4, {"models": ["diag:1,2,4", "jordan:1", "circulant:16"], "corpus_size": 50, "refinement_size": 6}),
    "E5": (
        _e5,
        {
            "model": "circulant:64",
            "p": 1.5,
            "alpha": 3.0,
            "beta": 2.0,
            "nu_offset": 1.0,
            "br_points": 12,
            "sizes": [2, 4, 8, 12],
            "delta_min": 0.01,
            "delta_points": 5,
            **SEARCH_DEFAULTS,
            "tuples": [1, 2, 4],
            "restarts": 2,
            "iterations": 30,
        },
    ),
    "E6": (
        _e6,
        {
            "models": ["diag:0.25,0.5,1,2,4", "jordan:1", "circulant:16"],
            "p": 1.5,
            "alpha": 1.5,
            "norm_p": 2.0,
            "corpus_size": 6,
            "factor": 4.0,
            **SEARCH_DEFAULTS,
            "tuples": [1, 2, 4],
            "restarts": 2,
            "iterations": 30,
        },
    ),
    "E7": (
        _e7,
        {
            "models": ["jordan:1", "jordan:2", "diag:1,2,4"],
            "growth": [1.0, 2.0, 0.0],
            "p": 3.0,
            "delta": 0.5,
            "eps": [1.0, 0.1, 0.01, 0.001],
            "points": 12,
            **SEARCH_DEFAULTS,
            "tuples": [1, 2, 4],
            "restarts": 2,
        },
    ),
}


def experiment_defaults(exp_id):
    return dict(REGISTRY[exp_id][1])


def run(config):
    """Run one experiment; module errors become a failing diagnostic row."""
    fn, defaults = REGISTRY[config.experiment]
    unknown = set(config.params) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys for {config.experiment}: {', '.join(sorted(unknown))}")
    cfg = {**defaults, **config.params, "seed": config.seed}
    env = {
        "seed": config.seed,
        "config": {k: cfg[k] for k in sorted(cfg)},
        "grid_spacing": DEFAULT_SPACING,
        "kernel_backend": BACKEND,
        "threads": thread_count(),
    }
    rep = Report(config.experiment, env=env)
    try:
        fn(cfg, rep)
    except SMLabError as exc:
        rep.add("error", "experiment ran to completion", {}, f"{type(exc).__name__}: {exc}", "no error", False)
    return rep
