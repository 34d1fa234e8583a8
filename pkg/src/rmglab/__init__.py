"""Numerical laboratory for Ricci magnetic geodesic flow on soliton moduli spaces."""

__version__ = "0.1.0"
