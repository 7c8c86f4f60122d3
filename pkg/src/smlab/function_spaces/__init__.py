"""Multiplier functions, log-grid Sobolev norms and Hoermander norms."""

from .grid import DEFAULT_S_RANGE, DEFAULT_SPACING, GridFunction, lattice_grid
from .multipliers import (
    MultiplierFunction,
    constant,
    custom,
    exp_pullback,
    standard_family,
    windowed_smooth,
)
from .partition import Partition, make_partition, standard_partition
from .sobolev import (
    HoermanderProfile,
    cossar_derivative,
    fractional_derivative,
    hoermander_norm,
    hoermander_profile,
    sobolev_norm,
)

__all__ = [
    "DEFAULT_S_RANGE",
    "DEFAULT_SPACING",
    "GridFunction",
    "HoermanderProfile",
    "MultiplierFunction",
    "Partition",
    "constant",
    "cossar_derivative",
    "custom",
    "exp_pullback",
    "fractional_derivative",
    "hoermander_norm",
    "hoermander_profile",
    "lattice_grid",
    "make_partition",
    "sobolev_norm",
    "standard_family",
    "standard_partition",
    "windowed_smooth",
]
