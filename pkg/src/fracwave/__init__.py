"""Numerical laboratory for the half-wave propagator against fractal measures."""

__version__ = "0.1.0"
