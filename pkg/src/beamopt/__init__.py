"""Planar geometrically exact beam mechanics coupled with optimal design
and optimal control, solved sequentially (diffuse-approximation response
surface + descent) or simultaneously (real-coded evolutionary search on
the stacked optimality residual)."""

__version__ = "0.1.0"
