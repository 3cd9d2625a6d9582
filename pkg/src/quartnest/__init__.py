"""Exact search and verification for A^4 + aB^4 = C^4 + aD^4."""

__version__ = "0.1.0"
