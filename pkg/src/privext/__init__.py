"""Exact enumeration of extreme posteriors under graph-based privacy constraints."""

__version__ = "0.1.0"
