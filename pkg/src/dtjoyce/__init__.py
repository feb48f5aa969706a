"""Numerics for BPS structures, their Riemann-Hilbert problems and the induced Joyce structures."""

__version__ = "0.1.0"
