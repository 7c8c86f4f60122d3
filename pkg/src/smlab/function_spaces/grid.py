"""Uniform grids in the logarithmic variable ``s = log(lambda)``."""

from dataclasses import dataclass
import io
import re

import numpy as np

from ..errors import ParameterError

# ln 2 / 2**7: dilations by powers of two are exact grid translations
DEFAULT_SPACING = np.log(2.0) / 128
DEFAULT_S_RANGE = (-16.0, 16.0)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples ``samples[k] = g(origin + k * spacing)``."""

    origin: float
    spacing: float
    samples: np.ndarray

    def __post_init__(self):
        if not self.spacing > 0:
            raise ParameterError(f"spacing must be positive, got {self.spacing}")
        samples = np.array(self.samples, dtype=complex).ravel()
        if samples.size == 0:
            raise ParameterError("a GridFunction needs at least one sample")
        samples.setflags(write=False)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def grid(self):
        return self.origin + self.spacing * np.arange(self.samples.size)

    @property
    def end(self):
        return self.origin + self.spacing * (self.samples.size - 1)

    def combinable(self, other):
        return (
            isinstance(other, GridFunction)
            and self.origin == other.origin
            and self.spacing == other.spacing
            and len(self) == len(other)
        )

    def _check(self, other):
        if not self.combinable(other):
            raise ParameterError(
                "grid functions differ in origin, spacing or length and cannot be combined"
            )

    def __add__(self, other):
        if np.isscalar(other):
            return self.with_samples(self.samples + other)
        self._check(other)
        return self.with_samples(self.samples + other.samples)

    def __mul__(self, other):
        if np.isscalar(other):
            return self.with_samples(self.samples * other)
        self._check(other)
        return self.with_samples(self.samples * other.samples)

    __radd__ = __add__
    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1) * other

    def with_samples(self, samples):
        return GridFunction(self.origin, self.spacing, samples)

    def max_abs(self):
        return float(np.max(np.abs(self.samples)))

    def tail_level(self):
        """Largest modulus among the two end samples, relative to the peak."""
        peak = self.max_abs()
        if peak == 0.0:
            return 0.0
        return max(abs(self.samples[0]), abs(self.samples[-1])) / peak

    # -- CSV interchange -------------------------------------------------
    def to_csv(self, path=None):
        buf = io.StringIO()
        buf.write(f"# origin={self.origin!r} spacing={self.spacing!r}\n")
        for s, v in zip(self.grid, self.samples):
            buf.write(f"{float(s)!r},{float(v.real)!r},{float(v.imag)!r}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source):
        """Read from a path or from CSV text (detected by a leading ``#``)."""
        if "\n" in source or source.lstrip().startswith("#"):
            text = source
        else:
            with open(source) as fh:
                text = fh.read()
        lines = [ln for ln in text.splitlines() if ln.strip()]
        m = re.match(r"#\s*origin=(\S+)\s+spacing=(\S+)", lines[0])
        if m is None:
            raise ParameterError("missing '# origin=<float> spacing=<float>' header")
        origin, spacing = float(m.group(1)), float(m.group(2))
        rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
        if rows.ndim != 2 or rows.shape[1] != 3:
            raise ParameterError("rows must be 's,re,im'")
        expected = origin + spacing * np.arange(len(rows))
        if not np.allclose(rows[:, 0], expected, rtol=0, atol=1e-9 * max(1.0, spacing)):
            raise ParameterError("s column is inconsistent with origin/spacing header")
        return cls(origin, spacing, rows[:, 1] + 1j * rows[:, 2])


def lattice_grid(s_min, s_max, spacing=DEFAULT_SPACING):
    """Grid of integer multiples of ``spacing`` covering ``[s_min, s_max]``."""
    k0 = int(np.floor(s_min / spacing))
    k1 = int(np.ceil(s_max / spacing))
    return spacing * np.arange(k0, k1 + 1)
