"""Metric quotients of planar polygons under boundary segment pairings."""

__version__ = "0.1.0"
