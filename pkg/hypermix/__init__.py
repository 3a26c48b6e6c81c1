"""Constructive hypermixing certificates for unbounded linear operators."""

__version__ = "0.1.0"
