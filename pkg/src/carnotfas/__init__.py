"""Exact and numeric verification tools for affinely equivalent sub-Riemannian metrics."""

__version__ = "0.1.0"
