"""Spectral measures of diagonal canonical systems via orthogonal polynomials on the circle."""

from .direct_problem import cross_validate, recover_moments, recover_verblunsky
from .errors import (
    CanonSpecError,
    InsufficientMoments,
    InvalidHeights,
    InvalidVerblunsky,
    NotPositiveDefinite,
    QuadratureFailure,
    Singular,
)
from .opuc import moments_from_verblunsky, orthonormal_sq_at_one, verblunsky_from_moments
from .toeplitz import check_positive_definite

__version__ = "0.1.0"

__all__ = [
    "CanonSpecError",
    "InsufficientMoments",
    "InvalidHeights",
    "InvalidVerblunsky",
    "NotPositiveDefinite",
    "QuadratureFailure",
    "Singular",
    "check_positive_definite",
    "cross_validate",
    "moments_from_verblunsky",
    "orthonormal_sq_at_one",
    "recover_moments",
    "recover_verblunsky",
    "verblunsky_from_moments",
]
