"""Closed-form multiplier functions on (0, inf).

Every multiplier is evaluable both in the spectral variable ``lam > 0`` and
in the logarithmic variable ``s = log(lam)`` (the exponential pullback
``f_e(s) = f(e**s)``).  Kinds that extend holomorphically to a sector also
accept complex arguments, which the contour engine needs.
"""

from dataclasses import dataclass, field
from functools import reduce
import json
import math

import numpy as np

from .. import _jets as jets
from ..errors import DomainError, ParameterError, SmoothnessError
from .grid import GridFunction

FD_STEP = 2.0**-10
FD_ACCURACY = 8

_ALIASES = {
    "sectorexp": "sector_exp",
    "sector_exp": "sector_exp",
    "waveregularized": "wave_regularized",
    "wave_regularized": "wave_regularized",
    "imaginarypower": "imaginary_power",
    "imaginary_power": "imaginary_power",
    "bochnerriesz": "bochner_riesz",
    "bochner_riesz": "bochner_riesz",
    "rational": "rational",
    "windowedsmooth": "windowed_smooth",
    "windowed_smooth": "windowed_smooth",
    "custom": "custom",
    "dilated": "dilated",
    "product": "product",
}


def _canonical_kind(kind):
    key = str(kind).replace("-", "_").lower()
    if key not in _ALIASES:
        raise ParameterError(f"unknown multiplier kind {kind!r}")
    return _ALIASES[key]


@dataclass(frozen=True, eq=False)
class MultiplierFunction:
    """A multiplier ``f : (0, inf) -> C`` with analyticity metadata.

    Instances are built by :func:`standard_family`, :func:`windowed_smooth`,
    :func:`custom` or :meth:`from_json`; the ``_impl`` object carries the
    actual formulas.
    """

    kind: str
    params: dict
    holomorphy_angle: float = None
    decay_at_zero: bool = False
    decay_at_infinity: bool = False
    bounded_at_zero: bool = True
    bounded_at_infinity: bool = True
    support: tuple = None
    _impl: object = field(default=None, repr=False)

    # -- evaluation ------------------------------------------------------
    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        if np.any(~(lam > 0)):
            raise DomainError(f"{self.kind} multiplier evaluated at lambda <= 0")
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return np.asarray(self._impl.f(lam), dtype=complex)

    def log_values(self, s):
        """Samples of ``f(e**s)`` at real ``s``."""
        s = np.asarray(s, dtype=float)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return np.asarray(self._impl.fe(s), dtype=complex)

    @property
    def holomorphic(self):
        return self.holomorphy_angle is not None

    def evaluate_complex(self, z):
        """Holomorphic extension to the slit plane (principal logarithm)."""
        if not self.holomorphic:
            raise DomainError(f"{self.kind} multiplier has no holomorphic extension")
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0):
            raise DomainError("holomorphic extension evaluated at 0")
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return np.asarray(self._impl.fz(z), dtype=complex)

    def log_taylor(self, s0, order):
        """Taylor coefficients ``c_k = (d/ds)^k f(e^s) / k!`` at ``s0``.

        Analytic (jet arithmetic) for closed-form kinds; central finite
        differences of step ``FD_STEP`` otherwise.
        """
        order = int(order)
        if order < 0:
            raise ParameterError("Taylor order must be nonnegative")
        jet = getattr(self._impl, "jet", None)
        if jet is not None:
            out = jet(jets.variable(float(s0), order))
        else:
            out = fd_taylor(self.log_values, float(s0), order)
        out = np.asarray(out, dtype=complex)
        if not np.all(np.isfinite(out)):
            raise SmoothnessError(f"{self.kind} multiplier is not smooth at s = {s0}")
        return out

    # -- algebra ---------------------------------------------------------
    def dilate(self, factor):
        """The multiplier ``lam -> f(factor * lam)``."""
        return _make("dilated", {"factor": float(factor), "base": self})

    def __mul__(self, other):
        if not isinstance(other, MultiplierFunction):
            return NotImplemented
        return _make("product", {"factors": [self, other]})

    # -- serialization ---------------------------------------------------
    def to_dict(self):
        if self.kind == "custom":
            raise ParameterError("custom multipliers wrap a Python callable and cannot be serialized")
        if self.kind == "dilated":
            params = {"factor": self.params["factor"], "base": self.params["base"].to_dict()}
        elif self.kind == "product":
            params = {"factors": [f.to_dict() for f in self.params["factors"]]}
        else:
            params = _jsonable(self.params)
        return {"kind": self.kind, "params": params}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        kind = _canonical_kind(data["kind"])
        params = dict(data.get("params", {}))
        if kind == "dilated":
            params["base"] = cls.from_dict(params["base"])
        elif kind == "product":
            params["factors"] = [cls.from_dict(f) for f in params["factors"]]
        elif kind == "custom":
            raise ParameterError("custom multipliers cannot be read from JSON")
        return _make(kind, params)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _complex_param(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


# -- finite differences --------------------------------------------------

_FD_CACHE = {}


def _fd_weights(k, accuracy=FD_ACCURACY):
    """Central-difference weights for the k-th derivative on offsets -M..M."""
    key = (k, accuracy)
    if key not in _FD_CACHE:
        half = (k + 1) // 2 - 1 + (accuracy + 1) // 2 if k > 0 else 0
        half = max(half, 1) if k > 0 else 0
        offsets = np.arange(-half, half + 1, dtype=float)
        V = np.vander(offsets, increasing=True).T
        rhs = np.zeros(len(offsets))
        rhs[k] = math.factorial(k)
        _FD_CACHE[key] = (offsets, np.linalg.solve(V, rhs))
    return _FD_CACHE[key]


def fd_taylor(fe, s0, order, step=FD_STEP):
    """Taylor coefficients of ``fe`` at ``s0`` by central finite differences."""
    out = np.zeros(order + 1, dtype=complex)
    out[0] = complex(np.asarray(fe(np.array([s0])))[0])
    for k in range(1, order + 1):
        offsets, w = _fd_weights(k)
        vals = np.asarray(fe(s0 + step * offsets), dtype=complex)
        out[k] = np.dot(w, vals) / step**k / math.factorial(k)
    return out


# -- kind implementations -------------------------------------------------


class _SectorExp:
    def __init__(self, theta):
        self.c = np.exp(1j * theta)

    def f(self, lam):
        return np.exp(-self.c * lam)

    def fe(self, s):
        return np.exp(-self.c * np.exp(s))

    fz = f

    def jet(self, sj):
        return jets.exp(-self.c * jets.exp(sj))


class _WaveRegularized:
    def __init__(self, s, alpha):
        self.s, self.alpha = s, alpha

    def f(self, lam):
        return (1.0 + abs(self.s) * lam) ** (-self.alpha) * np.exp(1j * self.s * lam)

    def fe(self, s):
        return self.f(np.exp(s))

    def fz(self, z):
        return (1.0 + abs(self.s) * z) ** (-self.alpha) * np.exp(1j * self.s * z)

    def jet(self, sj):
        lam = jets.exp(sj)
        base = jets.constant(1.0, len(sj) - 1) + abs(self.s) * lam
        return jets.mul(jets.power(base, -self.alpha), jets.exp(1j * self.s * lam))


class _ImaginaryPower:
    def __init__(self, t):
        self.t = t

    def f(self, lam):
        return np.exp(1j * self.t * np.log(lam))

    def fe(self, s):
        return np.exp(1j * self.t * s)

    def fz(self, z):
        return np.exp(1j * self.t * np.log(z))

    def jet(self, sj):
        return jets.exp(1j * self.t * sj)


class _BochnerRiesz:
    def __init__(self, u, exponent):
        self.u, self.e = u, exponent
        self.log_u = math.log(u)

    def f(self, lam):
        x = 1.0 - lam / self.u
        out = np.zeros(np.shape(lam), dtype=complex)
        m = x > 0
        out[m] = x[m] ** self.e
        return out

    def fe(self, s):
        x = 1.0 - np.exp(np.asarray(s) - self.log_u)
        out = np.zeros(np.shape(s), dtype=complex)
        m = x > 0
        out[m] = x[m] ** self.e
        return out

    def jet(self, sj):
        s0 = sj[0].real
        order = len(sj) - 1
        gap = self.log_u - s0
        if abs(gap) <= 1e-12 * max(1.0, abs(s0)):
            # derivatives of order below the exponent vanish at the kink
            if order < self.e:
                return np.zeros(order + 1, dtype=complex)
            raise SmoothnessError(
                f"(1 - lam/u)_+^{self.e} is not {order} times differentiable at lam = u"
            )
        if gap < 0:
            return np.zeros(order + 1, dtype=complex)
        inner = jets.constant(1.0, order) - jets.exp(jets.shift(sj, -self.log_u))
        return jets.power(inner, self.e)


class _Rational:
    def __init__(self, num, den):
        self.num = np.array([_complex_param(c) for c in num])
        self.den = np.array([_complex_param(c) for c in den])

    def f(self, lam):
        return np.polyval(self.num[::-1], lam) / np.polyval(self.den[::-1], lam)

    def fe(self, s):
        return self.f(np.exp(s))

    fz = f

    def jet(self, sj):
        lam = jets.exp(sj)
        return jets.div(jets.polyval(self.num, lam), jets.polyval(self.den, lam))


def _bump(x):
    x = np.asarray(x)
    out = np.zeros(x.shape, dtype=complex if np.iscomplexobj(x) else float)
    m = np.abs(x) < 1
    out[m] = np.exp(-1.0 / (1.0 - x[m] ** 2))
    return out


class _WindowedSmooth:
    def __init__(self, window, center, width, coeffs):
        self.window, self.center, self.width = window, center, width
        self.coeffs = np.array(coeffs, dtype=float).reshape(-1, 2)

    def _trig(self, x):
        out = 0.0
        for k, (a, b) in enumerate(self.coeffs):
            out = out + a * np.cos(k * np.pi * x) + b * np.sin(k * np.pi * x)
        return out

    def _shape(self, x):
        if self.window == "bump":
            w = _bump(x)
        else:
            w = np.exp(-0.5 * x**2)
        return w * self._trig(x)

    def fe(self, s):
        return self._shape((np.asarray(s) - self.center) / self.width)

    def f(self, lam):
        return self.fe(np.log(lam))

    def fz(self, z):
        return self._shape((np.log(z) - self.center) / self.width)

    def jet(self, sj):
        order = len(sj) - 1
        x = jets.shift(sj, -self.center) / self.width
        if self.window == "bump":
            if abs(x[0]) >= 1:
                return np.zeros(order + 1, dtype=complex)
            one = jets.constant(1.0, order)
            w = jets.exp(-jets.div(one, one - jets.mul(x, x)))
        else:
            w = jets.exp(-0.5 * jets.mul(x, x))
        trig = np.zeros(order + 1, dtype=complex)
        for k, (a, b) in enumerate(self.coeffs):
            trig = trig + a * jets.cos(k * np.pi * x) + b * jets.sin(k * np.pi * x)
        return jets.mul(w, trig)


class _Custom:
    def __init__(self, func, log_func=None):
        self._func = func
        self._log_func = log_func

    def f(self, lam):
        return self._func(lam)

    def fe(self, s):
        if self._log_func is not None:
            return self._log_func(s)
        return self._func(np.exp(s))

    def fz(self, z):
        return self._func(z)


class _Dilated:
    def __init__(self, base, factor):
        self.base, self.factor = base, factor
        self.shift = math.log(factor)

    def f(self, lam):
        return self.base._impl.f(self.factor * lam)

    def fe(self, s):
        return self.base._impl.fe(np.asarray(s) + self.shift)

    def fz(self, z):
        return self.base._impl.fz(self.factor * z)

    @property
    def jet(self):
        if getattr(self.base._impl, "jet", None) is None:
            return None
        return lambda sj: self.base._impl.jet(jets.shift(sj, self.shift))


class _Product:
    def __init__(self, factors):
        self.factors = factors

    def f(self, lam):
        return reduce(np.multiply, [g._impl.f(lam) for g in self.factors])

    def fe(self, s):
        return reduce(np.multiply, [g._impl.fe(s) for g in self.factors])

    def fz(self, z):
        return reduce(np.multiply, [g._impl.fz(z) for g in self.factors])

    @property
    def jet(self):
        if any(getattr(g._impl, "jet", None) is None for g in self.factors):
            return None
        return lambda sj: reduce(jets.mul, [g._impl.jet(sj) for g in self.factors])


def _poly_order_at_zero(c):
    nz = np.flatnonzero(np.abs(c) > 0)
    return int(nz[0]) if nz.size else None


def _poly_degree(c):
    nz = np.flatnonzero(np.abs(c) > 0)
    return int(nz[-1]) if nz.size else None


def _make(kind, params):
    kind = _canonical_kind(kind)
    p = dict(params)
    meta = {}
    if kind == "sector_exp":
        theta = float(p.get("theta", 0.0))
        if not abs(theta) < math.pi:
            raise ParameterError("SectorExp needs |theta| < pi")
        p = {"theta": theta}
        impl = _SectorExp(theta)
        half = math.pi / 2 - abs(theta)
        meta = dict(
            holomorphy_angle=half if half > 0 else None,
            decay_at_infinity=half > 0,
            bounded_at_infinity=half >= 0,
        )
    elif kind == "wave_regularized":
        s, alpha = float(p.get("s", 0.0)), float(p.get("alpha", 0.0))
        if alpha < 0:
            raise ParameterError("WaveRegularized needs alpha >= 0")
        p = {"s": s, "alpha": alpha}
        impl = _WaveRegularized(s, alpha)
        meta = dict(
            holomorphy_angle=math.pi if s == 0 else None,
            decay_at_infinity=(s != 0 and alpha > 0),
        )
    elif kind == "imaginary_power":
        t = float(p.get("t", 0.0))
        p = {"t": t}
        impl = _ImaginaryPower(t)
        meta = dict(holomorphy_angle=math.pi)
    elif kind == "bochner_riesz":
        u = float(p.get("u", 1.0))
        e = float(p.get("exponent", p.get("alpha_minus_1", 0.0)))
        if not u > 0 or e < 0:
            raise ParameterError("BochnerRiesz needs u > 0 and exponent >= 0")
        p = {"u": u, "exponent": e}
        impl = _BochnerRiesz(u, e)
        meta = dict(decay_at_infinity=True, support=(0.0, u))
    elif kind == "rational":
        num = [_complex_param(c) for c in p.get("num", [1.0])]
        den = [_complex_param(c) for c in p.get("den", [1.0])]
        impl = _Rational(num, den)
        den_c = np.array(den)
        if _poly_degree(den_c) is None:
            raise ParameterError("Rational denominator vanishes identically")
        roots = np.roots(den_c[: _poly_degree(den_c) + 1][::-1]) if _poly_degree(den_c) > 0 else np.array([])
        if np.any((np.abs(roots.imag) <= 1e-12 * (1 + np.abs(roots))) & (roots.real > 0)):
            raise ParameterError("Rational multiplier has a pole on (0, inf)")
        p = {"num": num, "den": den}
        o_num, o_den = _poly_order_at_zero(np.array(num)), _poly_order_at_zero(den_c)
        d_num, d_den = _poly_degree(np.array(num)), _poly_degree(den_c)
        if o_num is None:
            o_num, d_num = 10**9, -(10**9)
        at_zero = np.abs(roots) <= 1e-14
        angle = None
        if not np.any(at_zero) or o_num >= o_den:
            nz = roots[~at_zero]
            angle = float(np.min(np.abs(np.angle(nz)))) if nz.size else math.pi
        meta = dict(
            holomorphy_angle=angle,
            decay_at_zero=o_num > o_den,
            decay_at_infinity=d_num < d_den,
            bounded_at_zero=o_num >= o_den,
            bounded_at_infinity=d_num <= d_den,
        )
    elif kind == "windowed_smooth":
        window = str(p.get("window", "bump"))
        if window not in ("bump", "gauss"):
            raise ParameterError("window must be 'bump' or 'gauss'")
        center, width = float(p.get("center", 0.0)), float(p.get("width", 1.0))
        if not width > 0:
            raise ParameterError("window width must be positive")
        coeffs = np.array(p.get("coeffs", [[1.0, 0.0]]), dtype=float).reshape(-1, 2)
        p = {"window": window, "center": center, "width": width, "coeffs": coeffs.tolist()}
        impl = _WindowedSmooth(window, center, width, coeffs)
        meta = dict(
            holomorphy_angle=math.pi if window == "gauss" else None,
            decay_at_zero=True,
            decay_at_infinity=True,
            support=(math.exp(center - width), math.exp(center + width)) if window == "bump" else None,
        )
    elif kind == "custom":
        impl = _Custom(p["func"], p.get("log_func"))
        meta = dict(
            holomorphy_angle=p.get("holomorphy_angle"),
            decay_at_zero=bool(p.get("decay_at_zero", False)),
            decay_at_infinity=bool(p.get("decay_at_infinity", False)),
            support=p.get("support"),
        )
    elif kind == "dilated":
        base, factor = p["base"], float(p["factor"])
        if not factor > 0:
            raise ParameterError("dilation factor must be positive")
        p = {"factor": factor, "base": base}
        impl = _Dilated(base, factor)
        sup = None if base.support is None else (base.support[0] / factor, base.support[1] / factor)
        meta = dict(
            holomorphy_angle=base.holomorphy_angle,
            decay_at_zero=base.decay_at_zero,
            decay_at_infinity=base.decay_at_infinity,
            bounded_at_zero=base.bounded_at_zero,
            bounded_at_infinity=base.bounded_at_infinity,
            support=sup,
        )
    elif kind == "product":
        factors = list(p["factors"])
        p = {"factors": factors}
        impl = _Product(factors)
        angles = [g.holomorphy_angle for g in factors]
        sups = [g.support for g in factors if g.support is not None]
        support = None
        if sups:
            support = (max(a for a, _ in sups), min(b for _, b in sups))
        meta = dict(
            holomorphy_angle=None if any(a is None for a in angles) else min(angles),
            decay_at_zero=any(g.decay_at_zero for g in factors) and all(g.bounded_at_zero for g in factors),
            decay_at_infinity=any(g.decay_at_infinity for g in factors)
            and all(g.bounded_at_infinity for g in factors),
            bounded_at_zero=all(g.bounded_at_zero for g in factors),
            bounded_at_infinity=all(g.bounded_at_infinity for g in factors),
            support=support,
        )
    else:  # pragma: no cover - _canonical_kind already filtered
        raise ParameterError(kind)
    return MultiplierFunction(kind=kind, params=p, _impl=impl, **meta)


def standard_family(kind, params=None, **kwargs):
    """Build one of the standard multipliers.

    ``sector_exp`` (theta): ``exp(-e^{i theta} lam)``;
    ``wave_regularized`` (s, alpha): ``(1 + |s| lam)^{-alpha} e^{i s lam}``;
    ``imaginary_power`` (t): ``lam^{it}``;
    ``bochner_riesz`` (u, exponent): ``(1 - lam/u)_+^exponent``;
    ``rational`` (num, den): ascending coefficient lists;
    ``windowed_smooth`` (window, center, width, coeffs).
    """
    merged = dict(params or {})
    merged.update(kwargs)
    return _make(kind, merged)


def windowed_smooth(center=0.0, width=1.0, coeffs=((1.0, 0.0),), window="bump"):
    """Window in ``s = log lam`` times a trigonometric polynomial.

    ``f(e^s) = W(x) * sum_k (a_k cos(k pi x) + b_k sin(k pi x))`` with
    ``x = (s - center) / width``; ``W`` is the bump ``exp(-1/(1-x^2))`` or the
    Gaussian ``exp(-x^2/2)``.
    """
    return _make(
        "windowed_smooth",
        {"window": window, "center": center, "width": width, "coeffs": np.asarray(coeffs, float)},
    )


def custom(func, log_func=None, holomorphy_angle=None, decay_at_zero=False, decay_at_infinity=False, support=None):
    """Wrap a Python callable ``lam -> f(lam)`` (numpy-vectorized)."""
    return _make(
        "custom",
        {
            "func": func,
            "log_func": log_func,
            "holomorphy_angle": holomorphy_angle,
            "decay_at_zero": decay_at_zero,
            "decay_at_infinity": decay_at_infinity,
            "support": support,
        },
    )


def constant(value=1.0):
    return _make("rational", {"num": [value], "den": [1.0]})


def exp_pullback(f, origin, spacing, count):
    """Sample ``f(e^s)`` on ``s_k = origin + k * spacing``."""
    if count < 2 or not spacing > 0:
        raise ParameterError("need count >= 2 and spacing > 0")
    vals = f.log_values(origin + spacing * np.arange(int(count)))
    if not np.all(np.isfinite(vals)):
        raise DomainError("multiplier evaluation failed on the requested grid")
    return GridFunction(origin, spacing, vals)
