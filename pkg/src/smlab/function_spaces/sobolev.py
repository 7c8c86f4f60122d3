"""Fractional Sobolev and Hoermander norms on logarithmic grids.

Fourier convention: ``g_hat(xi) = int g(s) exp(-i s xi) ds``, which is what
``numpy.fft.fft`` approximates after scaling by the grid step.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.fft import fft, ifft, next_fast_len
from scipy.special import binom, rgamma, zeta

from ..errors import GridCoverage, ParameterError, TailTruncation
from .grid import DEFAULT_SPACING, GridFunction
from .multipliers import MultiplierFunction
from .partition import standard_partition

TOL_TAIL = 1e-8
# shifts of the Hoermander window run over this lattice; ln 2 is a multiple
DEFAULT_SHIFT_STEP = math.log(2.0) / 16
DEFAULT_PAD = 16


def _check_params(alpha, p):
    if not alpha >= 0:
        raise ParameterError(f"smoothness alpha must be >= 0, got {alpha}")
    if not (p >= 1 and np.isfinite(p)):
        raise ParameterError(f"integrability p must lie in [1, inf), got {p}")


def check_tails(samples, tol=TOL_TAIL, strict=True):
    """Raise (or warn) when the end samples exceed ``tol * max|g|``."""
    samples = np.asarray(samples)
    peak = np.max(np.abs(samples), axis=-1)
    ends = np.maximum(np.abs(samples[..., 0]), np.abs(samples[..., -1]))
    bad = ends > tol * peak
    if np.any(bad):
        level = float(np.max(ends[bad] / peak[bad]))
        msg = f"grid function does not decay at the grid ends (relative tail {level:.2e})"
        if strict:
            raise TailTruncation(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        return level
    return 0.0


def _fft_length(n, pad):
    return next_fast_len(max(int(math.ceil(pad * n)), n))


def frequencies(length, spacing):
    return 2.0 * np.pi * np.fft.fftfreq(length, d=spacing)


def _kink_correction(rows, spacing, alpha, dxi):
    """Euler-Maclaurin terms for the kink of ``(1 + |xi|)^(2 alpha)`` at 0.

    The periodic frequency sum integrates ``F = w |g_hat|^2`` with step
    ``dxi``; odd derivatives of ``w`` jump at the origin, which costs
    ``-dxi^2/12 J1 + dxi^4/720 J3`` with ``J1, J3`` the jumps of ``F', F'''``.
    ``|g_hat|^2`` and its second derivative at 0 come from moments of ``g``.
    """
    x = spacing * np.arange(rows.shape[-1])
    x = x - 0.5 * x[-1]
    m0, m1, m2 = (spacing * np.sum(x**k * rows, axis=-1) for k in range(3))
    G0 = np.abs(m0) ** 2
    # g_hat(xi) = m0 - i m1 xi - m2 xi^2 / 2 + ...
    G2 = 2.0 * np.abs(m1) ** 2 - 2.0 * np.real(m2 * np.conj(m0))
    a = 2.0 * alpha
    j1 = 2.0 * a
    j3 = 2.0 * a * (a - 1.0) * (a - 2.0)
    return dxi**2 / 12.0 * j1 * G0 - dxi**4 / 720.0 * (j3 * G0 + 3.0 * j1 * G2)


def _weighted_norms(rows, spacing, alpha, p, pad):
    """W^alpha_p norms of each row of a 2-d sample array."""
    n = rows.shape[-1]
    if p == 2:
        # Parseval on the padded periodic grid
        L = n if alpha == 0 else _fft_length(n, max(2, pad / 2))
        xi = frequencies(L, spacing)
        spec = fft(rows, n=L, axis=-1) * spacing
        w = (1.0 + np.abs(xi)) ** (2 * alpha)
        dxi = 2.0 * np.pi / (L * spacing)
        total = np.sum(w * np.abs(spec) ** 2, axis=-1) * dxi
        if alpha > 0:
            total = total + _kink_correction(rows, spacing, alpha, dxi)
        return np.sqrt(np.maximum(total, 0.0) / (2.0 * np.pi))
    if alpha == 0:
        return (spacing * np.sum(np.abs(rows) ** p, axis=-1)) ** (1.0 / p)
    # the weighted inverse transform decays only like s^-2, so the periodic
    # value carries an O(L^-2) error; one Richardson step removes it
    L = _fft_length(n, pad)
    out = []
    for length in (L, 2 * L):
        xi = frequencies(length, spacing)
        vals = ifft(fft(rows, n=length, axis=-1) * (1.0 + np.abs(xi)) ** alpha, axis=-1)
        out.append((spacing * np.sum(np.abs(vals) ** p, axis=-1)) ** (1.0 / p))
    return (4.0 * out[1] - out[0]) / 3.0


def sobolev_norm(g, alpha, p=2.0, pad=DEFAULT_PAD, strict=True):
    """``|| ((1 + |xi|)^alpha g_hat)^check ||_p`` for a GridFunction ``g``.

    For ``p != 2`` the weighted inverse transform is not compactly supported,
    so the samples are zero padded to ``pad`` times their length before the
    periodic transform.
    """
    alpha, p = float(alpha), float(p)
    _check_params(alpha, p)
    samples = np.asarray(g.samples)
    if not np.any(samples):
        return 0.0
    check_tails(samples, strict=strict)
    return float(_weighted_norms(samples[None, :], g.spacing, alpha, p, pad)[0])


def _derivative_symbol(xi, alpha):
    sym = np.zeros(xi.shape, dtype=complex)
    nz = xi != 0
    sym[nz] = (-1j * xi[nz]) ** alpha
    if xi.size % 2 == 0:
        sym[xi.size // 2] = 0.0  # Nyquist bin has no symmetric partner
    return sym


def _image_tails(samples, spacing, alpha, period, terms=10):
    """Left tails that periodic copies of ``D^alpha g`` add on the base grid.

    Far to the left of its support, ``D^alpha g(y)`` equals
    ``Gamma(-alpha)^-1 int (u - y)^(-1-alpha) g(u) du``; expanding about the
    grid centre in moments of ``g`` and summing over the copies gives
    Hurwitz zeta values.
    """
    if float(alpha).is_integer():
        return 0.0
    n = samples.size
    x = spacing * np.arange(n)
    c = 0.5 * x[-1]
    d = c - x
    out = np.zeros(n, dtype=complex)
    for k in range(terms):
        mk = spacing * np.sum((x - c) ** k * samples)
        q = 1.0 + alpha + k
        out += binom(-1.0 - alpha, k) * mk * period ** (-q) * zeta(q, 1.0 + d / period)
    return rgamma(-alpha) * out


def fractional_derivative(g, alpha, pad=8, strict=True):
    """Fourier multiplier ``(-i xi)^alpha`` applied to ``g`` (principal branch).

    With the transform convention above this is the right-sided (Weyl)
    derivative: it preserves vanishing on half lines ``[r, inf)`` and
    ``g(s) = Gamma(alpha)^-1 int_s^inf (u - s)^(alpha-1) D^alpha g(u) du``.
    The result lives on the grid of ``g``.  The transform runs on a zero
    padded periodic grid; the slowly decaying left tails that the periodic
    copies leave on the base grid are removed by a moment expansion, so the
    result is that of ``g`` extended by zero to the whole line.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise ParameterError(f"derivative order must be positive, got {alpha}")
    if pad < 2:
        raise ParameterError("fractional derivatives need pad >= 2")
    samples = np.asarray(g.samples)
    check_tails(samples, strict=strict)
    n = samples.size
    L = _fft_length(n, pad)
    sym = _derivative_symbol(frequencies(L, g.spacing), alpha)
    out = ifft(fft(samples, n=L) * sym)[:n]
    out = out - _image_tails(samples, g.spacing, alpha, L * g.spacing)
    return g.with_samples(out)


def cossar_derivative(g, alpha, pad=8, strict=True):
    """``(-1)^m`` times :func:`fractional_derivative`, ``m = floor(alpha)``.

    Agrees with the ordinary derivative for integer orders, and satisfies
    ``g(s) = (-1)^m / Gamma(alpha) int (u - s)_+^(alpha-1) g^(alpha)(u) du``.
    """
    d = fractional_derivative(g, alpha, pad=pad, strict=strict)
    if int(math.floor(alpha)) % 2:
        return d * (-1.0)
    return d


@dataclass(frozen=True)
class HoermanderProfile:
    """Windowed norms ``|| psi(. - tau) f_e ||`` for a lattice of shifts."""

    shifts: np.ndarray
    norms: np.ndarray
    alpha: float
    p: float

    @property
    def argmax(self):
        return float(self.shifts[int(np.argmax(self.norms))])

    @property
    def value(self):
        return float(np.max(self.norms))


def _shift_lattice(s_range, step):
    lo, hi = s_range
    k0, k1 = int(math.ceil(lo / step - 1e-9)), int(math.floor(hi / step + 1e-9))
    if k1 < k0:
        raise ParameterError("s_range contains no window shift")
    return np.arange(k0, k1 + 1)


def hoermander_profile(
    f,
    alpha,
    p=2.0,
    part=None,
    s_range=(-16.0, 16.0),
    spacing=DEFAULT_SPACING,
    shift_step=DEFAULT_SHIFT_STEP,
    pad=DEFAULT_PAD,
    chunk=64,
):
    """Per-shift windowed Sobolev norms of ``f`` (see :func:`hoermander_norm`)."""
    alpha, p = float(alpha), float(p)
    _check_params(alpha, p)
    part = standard_partition() if part is None else part
    if part.kind != "equidistant":
        raise ParameterError("Hoermander norms use an equidistant partition")
    if isinstance(f, GridFunction):
        spacing = f.spacing
    ratio = shift_step / spacing
    if abs(ratio - round(ratio)) > 1e-9 * ratio:
        raise ParameterError("shift step must be an integer multiple of the grid spacing")
    stride = int(round(ratio))
    half = int(math.ceil(part.radius / spacing))
    window = part.psi(spacing * np.arange(-half, half + 1))
    ks = _shift_lattice(s_range, shift_step)
    centers = ks * stride  # grid indices of the window centres

    if isinstance(f, GridFunction):
        offset = f.origin / spacing
        if abs(offset - round(offset)) > 1e-6:
            raise GridCoverage("grid origin is not a multiple of its spacing")
        first = centers[0] - half - int(round(offset))
        last = centers[-1] + half - int(round(offset))
        if first < 0 or last >= len(f):
            raise GridCoverage(
                f"windows over s in {tuple(s_range)} leave the grid "
                f"[{f.origin:.4g}, {f.end:.4g}]"
            )
        values = np.asarray(f.samples)[first : last + 1]
    elif isinstance(f, MultiplierFunction):
        idx = np.arange(centers[0] - half, centers[-1] + half + 1)
        values = f.log_values(spacing * idx)
    else:
        raise ParameterError("expected a MultiplierFunction or GridFunction")
    if not np.all(np.isfinite(values)):
        raise ParameterError("multiplier is not finite on the window grid")

    norms = np.empty(len(ks))
    width = 2 * half + 1
    starts = (centers - centers[0]).astype(int)
    for a in range(0, len(ks), chunk):
        rows = np.stack([values[st : st + width] for st in starts[a : a + chunk]]) * window
        norms[a : a + chunk] = _weighted_norms(rows, spacing, alpha, p, pad)
    return HoermanderProfile(ks * shift_step, norms, alpha, p)


def hoermander_norm(f, alpha, p=2.0, part=None, s_range=(-16.0, 16.0), **kwargs):
    """``sup_tau || psi(. - tau) f_e ||_{W^alpha_p}`` over a lattice of shifts.

    The window ``psi`` is the mother bump of ``part`` (the standard unit
    partition by default).  Shifts run over multiples of ``shift_step`` in
    ``s_range``; since ``ln 2`` is one of them, dilating ``f`` by a power of
    two translates the profile exactly.
    """
    return hoermander_profile(f, alpha, p, part, s_range, **kwargs).value
