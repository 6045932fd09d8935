"""Exact trajectory realization and output tracking for affine control systems."""

__version__ = "0.1.0"
