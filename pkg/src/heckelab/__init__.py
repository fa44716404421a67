"""Hecke-modification calculus for rank-2 bundles on rational and elliptic curves."""

__version__ = "0.1.0"
