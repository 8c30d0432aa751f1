"""Numerical and exact tools for coupled vortex equations on the sphere and their
dimensional reduction to Hermitian-Einstein metrics on P^1-bundles."""

__version__ = "0.1.0"
