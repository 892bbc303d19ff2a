"""Polygonal multi-bubble ansatz for the critical competitive system in R^3."""

__version__ = "0.1.0"
