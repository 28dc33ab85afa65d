"""Exact and numerical tools for fibers of polynomial maps with special bifurcation values."""

__version__ = "0.1.0"
