"""Numerical gauge geometry on 4-manifold charts: parallel transport,
curvature duality splits, holonomy of the self-dual 2-form bundle, and the
modified Levy Laplacian of parallel transport."""

__version__ = "0.1.0"
