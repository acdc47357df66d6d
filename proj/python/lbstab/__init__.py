"""Stability-certified lattice Boltzmann collision operators for the
linearized Euler equations (C++ core)."""

from ._core import (
    LbstabError,
    construct,
    convergence,
    equilibrium_map,
    exact_kernel_dimension,
    m1_d3q33,
    preset_names,
    preset_velocity,
    scan,
    velocity_set_names,
)

__all__ = [
    "LbstabError",
    "construct",
    "convergence",
    "equilibrium_map",
    "exact_kernel_dimension",
    "m1_d3q33",
    "preset_names",
    "preset_velocity",
    "scan",
    "velocity_set_names",
]
