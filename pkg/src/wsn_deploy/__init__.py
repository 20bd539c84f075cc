"""Evidential collaborative sensing and gradient-based sensor deployment."""

__version__ = "0.1.0"
