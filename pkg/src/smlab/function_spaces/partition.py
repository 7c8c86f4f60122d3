"""Smooth partitions of unity in the log variable and on the dyadic scale."""

from dataclasses import dataclass
import math

import numpy as np

from ..errors import ParameterError, PartitionConstruction
from .grid import DEFAULT_SPACING, GridFunction

TOL_PART = 1e-10


def bump(x):
    """``exp(-1/(1-x^2))`` on ``(-1, 1)``, zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    m = np.abs(x) < 1
    out[m] = np.exp(-1.0 / (1.0 - x[m] ** 2))
    return out


@dataclass(frozen=True, eq=False)
class Partition:
    """Translates ``psi(s - n * period)`` summing to one.

    For ``kind == "dyadic"`` the same construction runs in ``log2(lam)``, so
    ``phi(lam) = psi(log2 lam)`` and ``sum_n phi(2^-n lam) = 1``.
    """

    kind: str
    window: GridFunction
    index_range: tuple
    radius: float = 1.0
    period: float = 1.0
    defect: float = 0.0

    def psi(self, s):
        """Mother window at arbitrary points of the (log) variable."""
        s = np.asarray(s, dtype=float)
        num = bump(s / self.radius)
        reach = int(math.ceil(self.radius / self.period)) + 1
        den = sum(bump((s - m * self.period) / self.radius) for m in range(-reach, reach + 1))
        out = np.zeros(s.shape)
        nz = num > 0
        out[nz] = num[nz] / den[nz]
        return out

    def phi(self, lam):
        """Dyadic window ``phi(lam) = psi(log2 lam)``."""
        lam = np.asarray(lam, dtype=float)
        return self.psi(np.log2(lam))

    def member(self, n, x):
        """``psi_n(s) = psi(s - n P)``; for dyadic partitions ``phi(2^-n lam)``."""
        if self.kind == "dyadic":
            return self.phi(np.asarray(x, dtype=float) * 2.0 ** (-n))
        return self.psi(np.asarray(x, dtype=float) - n * self.period)

    @property
    def covered_range(self):
        """Range of the variable on which every contributing index lies in range."""
        n0, n1 = self.index_range
        lo = (n0 - 1) * self.period + self.radius
        hi = (n1 + 1) * self.period - self.radius
        if self.kind == "dyadic":
            return (2.0**lo, 2.0**hi)
        return (lo, hi)

    def partial_sum(self, x):
        n0, n1 = self.index_range
        return sum(self.member(n, x) for n in range(n0, n1 + 1))


def make_partition(kind="equidistant", window_params=None):
    """Build a partition of unity and verify it sums to one.

    ``window_params`` may hold ``radius`` (support half-width of the bump,
    default 1), ``period`` (default 1), ``index_range`` (default (-5, 5)) and
    ``spacing`` of the stored window samples.  The bump must overlap its
    neighbours (``radius > period / 2``) and stay within one period of the
    origin (``radius <= period``).
    """
    params = dict(window_params or {})
    kind = str(kind).lower()
    if kind not in ("equidistant", "dyadic"):
        raise ParameterError(f"unknown partition kind {kind!r}")
    radius = float(params.get("radius", 1.0))
    period = float(params.get("period", 1.0))
    n0, n1 = (int(v) for v in params.get("index_range", (-5, 5)))
    spacing = float(params.get("spacing", DEFAULT_SPACING))
    if not (radius > 0 and period > 0) or n1 < n0:
        raise ParameterError("radius and period must be positive, index range nonempty")
    if radius > period:
        raise PartitionConstruction(
            f"window support radius {radius} exceeds the period {period}"
        )
    if radius <= period / 2:
        raise PartitionConstruction(
            f"window support radius {radius} leaves gaps between translates of period {period}"
        )
    k = int(math.ceil(radius / spacing))
    grid = spacing * np.arange(-k, k + 1)
    draft = Partition(kind, GridFunction(-k * spacing, spacing, np.ones(1)), (n0, n1), radius, period)
    window = GridFunction(-k * spacing, spacing, draft.psi(grid))

    lo, hi = (n0 - 1) * period + radius, (n1 + 1) * period - radius
    if hi <= lo:
        raise PartitionConstruction("index range too short to cover any interval")
    probe = np.linspace(lo, hi, 4001)
    total = sum(draft.psi(probe - n * period) for n in range(n0, n1 + 1))
    defect = float(np.max(np.abs(total - 1.0)))
    if defect > TOL_PART:
        raise PartitionConstruction(f"partition defect {defect:.3e} above {TOL_PART:g}")
    return Partition(kind, window, (n0, n1), radius, period, defect)


_STANDARD = {}


def standard_partition():
    """Equidistant partition with the unit bump and unit period (cached)."""
    if "eq" not in _STANDARD:
        _STANDARD["eq"] = make_partition("equidistant")
    return _STANDARD["eq"]
