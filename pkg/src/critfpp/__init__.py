"""Simulation and estimation toolkit for static and dynamical critical
first-passage percolation on the triangular site lattice."""

__version__ = "0.1.0"

from . import distributions, dynamics, experiments, fields, fpp, lattice, percolation, rng

__all__ = [
    "distributions",
    "dynamics",
    "experiments",
    "fields",
    "fpp",
    "lattice",
    "percolation",
    "rng",
]
