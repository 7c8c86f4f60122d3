"""Finite-dimensional sectorial operator models and their elementary families.

Four structures are supported:

``diagonal``   diag(spectrum), spectrum in (0, inf);
``jordan``     mu * exp(B) with B the nilpotent (m+1)x(m+1) Jordan block;
``circulant``  a real circulant matrix acting on mean-zero vectors, whose
               nonzero Fourier modes have positive symbols (the zero mode is
               excluded from the model space, so the model is injective);
``general``    any square matrix whose spectrum lies in (0, inf).

Functions of a circulant model are circulants with symbol ``f(mu_k)`` for
``k >= 1`` and ``0`` on the constant mode, i.e. ``f(A)`` is ``f(L) P`` with
``P`` the projection onto mean-zero vectors.  In particular ``1(A) = P``,
the identity of the model space.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .errors import CertificateError, ParameterError, SpectrumError
from .opnorm import operator_norm

STRUCTURES = ("diagonal", "jordan", "circulant", "general")


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _circulant_from_symbol(symbol):
    """Circulant matrix with eigenvalue ``symbol[k]`` on the Fourier mode ``k``."""
    return sla.circulant(np.fft.ifft(symbol))


@dataclass(frozen=True)
class SectorialityCertificate:
    """Observed resolvent bounds ``sup ||lam (lam - A)^-1||`` on sector boundaries.

    ``bounds[i]`` belongs to ``angles[i]``; for ``p`` outside {1, 2, inf}
    ``bounds`` holds certified lower values and ``upper_bounds`` the
    interpolation upper values.
    """

    angles: tuple
    bounds: tuple
    upper_bounds: tuple = None
    argmax: tuple = None
    hinf_bound: float = None
    boundary_samples: int = 64

    def bound(self, theta):
        """Bound valid for angle ``theta`` (the one of the nearest listed angle below)."""
        ok = [b for a, b in zip(self.angles, self.bounds) if a <= theta + 1e-15]
        if not ok:
            raise ParameterError(f"no certified angle at or below {theta}")
        return ok[-1]

    def to_dict(self):
        return {
            "angles": list(self.angles),
            "bounds": list(self.bounds),
            "upper_bounds": None if self.upper_bounds is None else list(self.upper_bounds),
            "hinf_bound": self.hinf_bound,
            "boundary_samples": self.boundary_samples,
        }


@dataclass(frozen=True, eq=False)
class OperatorModel:
    matrix: np.ndarray
    space_p: float
    structure: str
    params: dict = field(default_factory=dict)
    certificate: SectorialityCertificate = None

    def __post_init__(self):
        m = _readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError("operator matrix must be square")
        if self.structure not in STRUCTURES:
            raise ParameterError(f"unknown structure {self.structure!r}")
        if not self.space_p >= 1:
            raise ParameterError("space_p must be >= 1")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "space_p", float(self.space_p))

    # -- basic data --------------------------------------------------------
    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def dim(self):
        """Dimension of the model space."""
        return self.n - 1 if self.structure == "circulant" else self.n

    @property
    def eigenvalues(self):
        if self.structure == "diagonal":
            return np.asarray(self.params["spectrum"], dtype=float)
        if self.structure == "jordan":
            return np.full(self.n, self.params["eigenvalue"], dtype=float)
        if self.structure == "circulant":
            return np.asarray(self.params["symbol"])[1:].real
        return np.linalg.eigvals(self.matrix)

    @property
    def spectral_range(self):
        ev = np.abs(self.eigenvalues)
        return float(ev.min()), float(ev.max())

    def identity(self):
        if self.structure == "circulant":
            return self.from_eigen_values(np.ones(self.dim))
        return np.eye(self.n, dtype=complex)

    def with_certificate(self, cert):
        return OperatorModel(self.matrix, self.space_p, self.structure, self.params, cert)

    def scaled(self, c):
        """The model ``c A`` (``c > 0``), same structure."""
        c = float(c)
        if not c > 0:
            raise ParameterError("scaling factor must be positive")
        if self.structure == "diagonal":
            return diagonal_model(c * self.eigenvalues, self.space_p)
        if self.structure == "jordan":
            return jordan_model(self.params["m"], c * self.params["eigenvalue"], self.space_p)
        if self.structure == "circulant":
            return circulant_model(c * np.asarray(self.params["symbol"]), self.space_p)
        return general_model(c * self.matrix, self.space_p)

    def in_space(self, p):
        """Same operator on a different ambient l^p."""
        return OperatorModel(self.matrix, p, self.structure, self.params)

    # -- functions of diagonalizable structures -----------------------------
    def from_eigen_values(self, values):
        """Matrix of ``f(A)`` given ``f`` at the eigenvalues (diagonal / circulant)."""
        values = np.asarray(values, dtype=complex)
        if self.structure == "diagonal":
            return np.diag(values)
        if self.structure == "circulant":
            return _circulant_from_symbol(np.concatenate([[0.0], values]))
        raise ParameterError(f"{self.structure} model is not diagonalizable by structure")

    @property
    def nilpotent(self):
        """``B`` with ``A = mu exp(B)`` for Jordan models."""
        k = self.n
        return np.diag(np.ones(k - 1), 1).astype(complex)

    def _jordan_series(self, scalar, N, coeff):
        """``scalar * sum_k (coeff N)^k / k!`` for nilpotent ``N``."""
        out = np.eye(self.n, dtype=complex)
        term = np.eye(self.n, dtype=complex)
        for k in range(1, self.n):
            term = term @ (coeff * N) / k
            out = out + term
        return scalar * out

    # -- elementary operator functions ----------------------------------------
    def resolvent(self, z):
        """``(z - A)^-1`` on the model space."""
        z = complex(z)
        if self.structure in ("diagonal", "circulant"):
            ev = self.eigenvalues
            if np.any(ev == z):
                raise CertificateError(f"resolvent evaluated in the spectrum at {z}")
            return self.from_eigen_values(1.0 / (z - ev))
        M = z * np.eye(self.n) - self.matrix
        try:
            return np.linalg.solve(M, np.eye(self.n))
        except np.linalg.LinAlgError as exc:
            raise CertificateError(f"singular resolvent at {z}") from exc

    def group(self, t):
        """Wave group ``exp(i t A)``."""
        if self.structure in ("diagonal", "circulant"):
            return self.from_eigen_values(np.exp(1j * t * self.eigenvalues))
        if self.structure == "jordan":
            mu = self.params["eigenvalue"]
            M = sla.expm(self.nilpotent) - np.eye(self.n)
            return self._jordan_series(np.exp(1j * t * mu), M, 1j * t * mu)
        return sla.expm(1j * t * self.matrix)

    def semigroup(self, z):
        """``exp(-z A)``."""
        z = complex(z)
        if self.structure in ("diagonal", "circulant"):
            return self.from_eigen_values(np.exp(-z * self.eigenvalues))
        if self.structure == "jordan":
            mu = self.params["eigenvalue"]
            M = sla.expm(self.nilpotent) - np.eye(self.n)
            return self._jordan_series(np.exp(-z * mu), M, -z * mu)
        return sla.expm(-z * self.matrix)

    def imaginary_power(self, t):
        """``A^{it}``."""
        if self.structure in ("diagonal", "circulant"):
            return self.from_eigen_values(np.exp(1j * t * np.log(self.eigenvalues)))
        if self.structure == "jordan":
            mu = self.params["eigenvalue"]
            return self._jordan_series(np.exp(1j * t * math.log(mu)), self.nilpotent, 1j * t)
        return sla.expm(1j * t * sla.logm(self.matrix))

    def fourier_combination(self, ts, coeffs, kind="group"):
        """``sum_k c_k exp(i t_k A)`` (``kind="group"``) or ``sum_k c_k A^{i t_k}`` (``"power"``)."""
        ts = np.asarray(ts, dtype=float)
        coeffs = np.asarray(coeffs, dtype=complex)
        if self.structure in ("diagonal", "circulant"):
            ev = self.eigenvalues
            x = ev if kind == "group" else np.log(ev)
            vals = np.exp(1j * np.outer(x, ts)) @ coeffs
            return self.from_eigen_values(vals)
        if self.structure == "jordan":
            mu = self.params["eigenvalue"]
            if kind == "group":
                base, scale = np.exp(1j * ts * mu) * coeffs, 1j * ts * mu
                N = sla.expm(self.nilpotent) - np.eye(self.n)
            else:
                base, scale = np.exp(1j * ts * math.log(mu)) * coeffs, 1j * ts
                N = self.nilpotent
            out = np.zeros((self.n, self.n), dtype=complex)
            Nj = np.eye(self.n, dtype=complex)
            for j in range(self.n):
                out = out + np.sum(base * scale**j) / math.factorial(j) * Nj
                Nj = Nj @ N
            return out
        w, V = np.linalg.eig(self.matrix)
        if np.linalg.cond(V) < 1e8:
            x = w if kind == "group" else np.log(w)
            vals = np.exp(1j * np.outer(x, ts)) @ coeffs
            return (V * vals) @ np.linalg.inv(V)
        gen = 1j * self.matrix if kind == "group" else 1j * sla.logm(self.matrix)
        return sum(c * sla.expm(t * gen) for t, c in zip(ts, coeffs))

    def norm(self, T=None):
        """Operator-norm bracket of ``T`` (default: the model) on the ambient l^p."""
        return operator_norm(self.matrix if T is None else T, self.space_p)

    # -- serialization -------------------------------------------------------
    def to_dict(self):
        entries = [[float(v.real), float(v.imag)] for v in self.matrix.ravel()]
        return {"n": self.n, "space_p": self.space_p, "structure": self.structure, "entries": entries}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        n = int(data["n"])
        entries = np.asarray(data["entries"], dtype=float)
        if entries.shape != (n * n, 2):
            raise ParameterError("entries must hold n*n [re, im] pairs")
        M = (entries[:, 0] + 1j * entries[:, 1]).reshape(n, n)
        p = float(data.get("space_p", 2.0))
        structure = data.get("structure", "general").lower()
        if structure == "diagonal":
            if np.any(M - np.diag(np.diag(M))):
                raise ParameterError("diagonal structure with off-diagonal entries")
            if np.any(np.diag(M).imag != 0):
                raise SpectrumError("diagonal entries must be real and positive")
            return diagonal_model(np.diag(M).real, p)
        if structure == "jordan":
            mu = M[0, 0].real
            model = jordan_model(n - 1, mu, p)
            if not np.allclose(model.matrix, M, rtol=1e-12, atol=1e-14):
                raise ParameterError("matrix is not mu * exp(B) for the nilpotent Jordan block")
            return model
        if structure == "circulant":
            if not np.allclose(M, sla.circulant(M[:, 0]), rtol=0, atol=1e-12 * np.abs(M).max()):
                raise ParameterError("matrix is not circulant")
            model = circulant_model(np.fft.fft(M[:, 0]), p)
            # keep the stored entries bit for bit
            return OperatorModel(M.real if not np.any(M.imag) else M, p, "circulant", model.params)
        return general_model(M, p)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# -- constructors ------------------------------------------------------------


def diagonal_model(spectrum, space_p=2.0):
    spec = np.asarray(spectrum, dtype=float).ravel()
    if spec.size == 0:
        raise ParameterError("spectrum must be nonempty")
    if np.any(~(spec > 0)) or not np.all(np.isfinite(spec)):
        raise SpectrumError(f"diagonal model needs spectrum in (0, inf), got {spec.tolist()}")
    return OperatorModel(np.diag(spec), space_p, "diagonal", {"spectrum": spec.tolist()})


def jordan_model(m, eigenvalue=1.0, space_p=2.0):
    """``eigenvalue * exp(B)``, ``B`` the nilpotent Jordan block of size ``m + 1``."""
    if int(m) != m or m < 1:
        raise ParameterError("Jordan order m must be a positive integer")
    m = int(m)
    if not eigenvalue > 0:
        raise SpectrumError("Jordan eigenvalue must be positive")
    B = np.diag(np.ones(m), 1)
    A = float(eigenvalue) * sla.expm(B)
    # exp of a nilpotent block is the finite series; clean the roundoff
    exact = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        for j in range(i, m + 1):
            exact[i, j] = float(eigenvalue) / math.factorial(j - i)
    assert np.allclose(A, exact)
    return OperatorModel(exact, space_p, "jordan", {"m": m, "eigenvalue": float(eigenvalue)})


def circulant_model(symbol, space_p=2.0):
    """Real circulant with the given symbol; the constant mode is excluded."""
    symbol = np.asarray(symbol, dtype=complex).ravel()
    N = symbol.size
    if N < 2:
        raise ParameterError("circulant models need N >= 2")
    nz = symbol[1:]
    if np.any(np.abs(nz.imag) > 1e-12 * np.abs(nz).max()) or np.any(nz.real <= 0):
        raise SpectrumError("circulant symbol must be positive on the nonconstant modes")
    if not np.allclose(symbol[1:], symbol[1:][::-1]):
        raise SpectrumError("circulant symbol must be symmetric (real matrix)")
    symbol = np.concatenate([[symbol[0].real], nz.real]).astype(float)
    matrix = _circulant_from_symbol(symbol).real
    return OperatorModel(matrix, space_p, "circulant", {"symbol": symbol.tolist()})


def circulant_laplacian(N, space_p=2.0):
    """Periodic second difference ``2I - S - S^T`` on mean-zero vectors of length N."""
    if int(N) != N or N < 3:
        raise ParameterError("circulant Laplacian needs N >= 3")
    N = int(N)
    k = np.arange(N)
    symbol = 4.0 * np.sin(np.pi * k / N) ** 2
    symbol[0] = 0.0
    model = circulant_model(symbol, space_p)
    exact = 2.0 * np.eye(N) - np.roll(np.eye(N), 1, axis=0) - np.roll(np.eye(N), -1, axis=0)
    return OperatorModel(exact, space_p, "circulant", dict(model.params, N=N))


def general_model(matrix, space_p=2.0, tol=1e-10):
    M = np.asarray(matrix, dtype=complex)
    ev = np.linalg.eigvals(M)
    if np.any(np.abs(ev.imag) > tol * np.abs(ev).max()) or np.any(ev.real <= 0):
        raise SpectrumError("general model needs spectrum in (0, inf)")
    return OperatorModel(M, space_p, "general", {})


# -- sectoriality ---------------------------------------------------------------


def _ray_norms(A, theta, radii, p):
    out_lo, out_hi = [], []
    for r in radii:
        lam = r * np.exp(1j * theta)
        T = lam * A.resolvent(lam)
        b = operator_norm(T, p)
        out_lo.append(b.lower)
        out_hi.append(b.upper)
    return np.array(out_lo), np.array(out_hi)


def certify_sectoriality(A, angles=None, boundary_samples=64, hinf_sigma=None):
    """Observed ``sup ||lam (lam - A)^-1||`` on both rays of each sector boundary.

    Each ray is sampled at ``boundary_samples`` log-spaced radii over
    ``[min|spec| / 1e3, max|spec| * 1e3]`` and the largest sample is refined
    by a bounded scalar search in ``log r``.  The reported bound for an angle
    is the maximum over all listed angles at or above it, which is what the
    sectoriality constant measures, so bounds never increase with the angle.
    """
    if angles is None:
        angles = np.pi * np.array([1 / 16, 1 / 8, 1 / 4, 1 / 2, 3 / 4])
    angles = np.sort(np.asarray(angles, dtype=float))
    if np.any((angles <= 0) | (angles >= np.pi)):
        raise ParameterError("sector angles must lie in (0, pi)")
    if boundary_samples < 64:
        raise ParameterError("boundary_samples must be at least 64")
    p = A.space_p
    exact = p in (1.0, 2.0)
    lo_ev, hi_ev = A.spectral_range
    log_r = np.linspace(math.log(lo_ev / 1e3), math.log(hi_ev * 1e3), boundary_samples)
    raw_lo, raw_hi, where = [], [], []
    for theta in angles:
        best_lo, best_hi, best_at = 0.0, 0.0, None
        for sgn in (1.0, -1.0):
            lo, hi = _ray_norms(A, sgn * theta, np.exp(log_r), p)
            k = int(np.argmax(lo))
            a, b = log_r[max(k - 1, 0)], log_r[min(k + 1, len(log_r) - 1)]
            res = minimize_scalar(
                lambda x: -operator_norm(
                    np.exp(x + 1j * sgn * theta) * A.resolvent(np.exp(x + 1j * sgn * theta)), p
                ).lower,
                bounds=(a, b),
                method="bounded",
                options={"xatol": 1e-10},
            )
            lam = np.exp(res.x + 1j * sgn * theta)
            refined = operator_norm(lam * A.resolvent(lam), p)
            lo_max = max(float(lo[k]), refined.lower)
            if lo_max > best_lo:
                best_lo = lo_max
                best_at = complex(lam if refined.lower > lo[k] else np.exp(log_r[k] + 1j * sgn * theta))
            best_hi = max(best_hi, float(hi.max()), refined.upper, lo_max)
        if not (np.isfinite(best_lo) and np.isfinite(best_hi)):
            raise CertificateError(f"resolvent bound not finite at angle {theta}")
        raw_lo.append(best_lo)
        raw_hi.append(best_hi)
        where.append(best_at)
    bounds = tuple(np.maximum.accumulate(np.array(raw_lo)[::-1])[::-1].tolist())
    upper = None
    if not exact:
        upper = tuple(np.maximum.accumulate(np.array(raw_hi)[::-1])[::-1].tolist())
    hinf = None
    if hinf_sigma is not None:
        hinf = _hinf_probe(A, float(hinf_sigma))
    return SectorialityCertificate(
        tuple(angles.tolist()), bounds, upper, tuple(where), hinf, boundary_samples
    )


def _hinf_probe(A, sigma, n_angles=9, n_radii=25):
    """``max ||exp(-z A)||`` over ``|arg z| <= pi/2 - sigma``; each probe has sup 1 on the sector."""
    lo_ev, hi_ev = A.spectral_range
    best = 0.0
    for phi in np.linspace(-(np.pi / 2 - sigma), np.pi / 2 - sigma, n_angles):
        for r in np.geomspace(1e-2 / hi_ev, 1e2 / lo_ev, n_radii):
            best = max(best, operator_norm(A.semigroup(r * np.exp(1j * phi)), A.space_p).lower)
    return best


# -- families ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Labelled finite family ``{(param, T)}`` on one ambient l^p_n."""

    label: str
    members: tuple
    space_p: float

    def __post_init__(self):
        members = tuple((prm, _readonly(T)) for prm, T in self.members)
        if not members:
            raise ParameterError("operator family must be nonempty")
        shapes = {T.shape for _, T in members}
        if len(shapes) != 1 or len(next(iter(shapes))) != 2:
            raise ParameterError("family members must share one square shape")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "space_p", float(self.space_p))

    def __len__(self):
        return len(self.members)

    @property
    def params(self):
        return [prm for prm, _ in self.members]

    @property
    def matrices(self):
        return np.stack([T for _, T in self.members])

    @property
    def n(self):
        return self.members[0][1].shape[0]

    def union(self, other, label=None):
        if other.space_p != self.space_p:
            raise ParameterError("families live on different spaces")
        return OperatorFamily(label or f"{self.label}+{other.label}", self.members + other.members, self.space_p)

    def scaled(self, a):
        return OperatorFamily(f"{a}*{self.label}", tuple((prm, a * T) for prm, T in self.members), self.space_p)

    def to_list(self):
        out = []
        for prm, T in self.members:
            op = OperatorModel(T, self.space_p, "general", {}).to_dict()
            out.append({"param": _param_json(prm), "operator": op})
        return out

    def to_json(self):
        return json.dumps(self.to_list())

    @classmethod
    def from_list(cls, items, label="family"):
        members = []
        p = None
        for item in items:
            op = item["operator"]
            n = int(op["n"])
            e = np.asarray(op["entries"], dtype=float)
            members.append((item.get("param"), (e[:, 0] + 1j * e[:, 1]).reshape(n, n)))
            p = float(op.get("space_p", 2.0)) if p is None else p
            if float(op.get("space_p", 2.0)) != p:
                raise ParameterError("family members declare different spaces")
        return cls(label, tuple(members), p)

    @classmethod
    def from_json(cls, text, label="family"):
        return cls.from_list(json.loads(text), label)


def _param_json(prm):
    if isinstance(prm, (complex, np.complexfloating)):
        return [float(prm.real), float(prm.imag)]
    if isinstance(prm, (tuple, list, np.ndarray)):
        return [_param_json(v) for v in prm]
    if isinstance(prm, np.generic):
        return prm.item()
    return prm


FAMILY_KINDS = ("semigroup", "wave", "imaginary_powers", "bochner_riesz")


def elementary_family(A, kind, parameter_grid, alpha=0.0, exponent=None):
    """Elementary operator families of ``A``, scalar prefactors included.

    ``semigroup``        params ``(t, theta)``: ``(pi/2 - |theta|)^alpha exp(-t e^{i theta} A)``
    ``wave``             params ``s``: ``(1 + |s| A)^-alpha exp(i s A)``
    ``imaginary_powers`` params ``t``: ``(1 + |t|)^-alpha A^{it}``
    ``bochner_riesz``    params ``u``: ``(1 - A/u)_+^exponent``
    Members are evaluated by :func:`smlab.calculus.spectral_apply` and kept in
    parameter order.
    """
    from .calculus import spectral_apply
    from .function_spaces import standard_family

    kind = str(kind).lower()
    if kind not in FAMILY_KINDS:
        raise ParameterError(f"unknown family kind {kind!r}")
    members = []
    for prm in parameter_grid:
        if kind == "semigroup":
            t, theta = prm if np.ndim(prm) else (prm, 0.0)
            if not t > 0 or not abs(theta) < np.pi / 2:
                raise ParameterError("semigroup parameters need t > 0 and |theta| < pi/2")
            f = standard_family("sector_exp", theta=float(theta))
            T = (np.pi / 2 - abs(theta)) ** alpha * spectral_apply(A.scaled(t), f).value
        elif kind == "wave":
            f = standard_family("wave_regularized", s=float(prm), alpha=float(alpha))
            T = spectral_apply(A, f).value
        elif kind == "imaginary_powers":
            f = standard_family("imaginary_power", t=float(prm))
            T = (1.0 + abs(prm)) ** (-alpha) * spectral_apply(A, f).value
        else:
            e = float(alpha - 1.0 if exponent is None else exponent)
            f = standard_family("bochner_riesz", u=float(prm), exponent=e)
            T = spectral_apply(A, f).value
        members.append((prm, T))
    return OperatorFamily(f"{kind}(alpha={alpha})", tuple(members), A.space_p)
