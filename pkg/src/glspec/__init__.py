"""Spectral toolkit for a family of non-self-adjoint generalized Laguerre
semigroups: generator, invariant density, eigen and co-eigen sequences,
intertwining kernel, heat-kernel expansion, and saddle-point norm bounds."""

from .core import (AsympConstants, ConvergenceError, ContourError, DomainError,
                   GLParams, GlspecError, PoleError, Precision, PrecisionError,
                   QuadratureError, RealFn, TruncationError, asymp_constants,
                   const_fn, make_params, monomial, phi, poly_fn)

__all__ = [
    "AsympConstants", "ConvergenceError", "ContourError", "DomainError",
    "GLParams", "GlspecError", "PoleError", "Precision", "PrecisionError",
    "QuadratureError", "RealFn", "TruncationError", "asymp_constants",
    "const_fn", "make_params", "monomial", "phi", "poly_fn",
]

__version__ = "0.1.0"
