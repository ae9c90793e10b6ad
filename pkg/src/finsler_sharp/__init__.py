"""Minkowski norms, anisotropic rearrangement, sharp constants, and radial solvers."""

from . import constants, manifold, norms, pde, rearrange, verify

__version__ = "0.1.0"

__all__ = ["constants", "manifold", "norms", "pde", "rearrange", "verify"]
