"""Weak Frenet data for polygonal and non-smooth space curves."""

from . import curves, errors, forces, polygonal, sphere, weak

__all__ = ["curves", "errors", "forces", "polygonal", "sphere", "weak"]
