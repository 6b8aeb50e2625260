"""Lattice Gaussian fields, Hermite functionals, chaos diagnostics, and
limit-regime experiments."""

__version__ = "0.1.0"
