"""Curvature of metrics that change signature across a hypersurface."""

__version__ = "0.1.0"
