"""Nonlinear quantum dynamics on density matrices."""

__version__ = "0.1.0"
