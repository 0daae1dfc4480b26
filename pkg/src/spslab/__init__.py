"""Numerical laboratory for the Schroedinger-Poisson-Slater energy on the mass sphere."""

__version__ = "0.1.0"
