"""Orthogonal polynomials on the unit circle for even (real) measures.

Polynomials are dense real coefficient arrays in ascending degree. The
inner product is normalized by the moments: <z^k, 1> = c_k.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidVerblunsky, NotPositiveDefinite, Singular
from .toeplitz import brute_det, build_toeplitz

__all__ = [
    "MonicPair",
    "reverse",
    "szego_step",
    "monic_pairs",
    "monic_norm_sq",
    "orthonormal_sq_at_one",
    "moments_from_verblunsky",
    "verblunsky_from_moments",
    "heine_monic_oracle",
    "schur_moments",
]


def reverse(p):
    """Reverse polynomial P*(z) = z^n P(1/z) for real coefficients."""
    return np.asarray(p, dtype=float)[::-1].copy()


@dataclass(frozen=True)
class MonicPair:
    phi: np.ndarray
    phi_star: np.ndarray

    @property
    def degree(self):
        return self.phi.size - 1

    @classmethod
    def one(cls):
        return cls(np.ones(1), np.ones(1))


def _check_alpha(alpha, index=None):
    if not (np.isfinite(alpha) and abs(alpha) < 1.0):
        where = "" if index is None else f" at index {index}"
        raise InvalidVerblunsky(f"Verblunsky coefficient{where} must lie in (-1, 1), got {alpha!r}")


def _check_alphas(alphas):
    alphas = np.asarray(alphas, dtype=float).ravel()
    for j, a in enumerate(alphas):
        _check_alpha(a, j)
    return alphas


def szego_step(pair, alpha):
    """One step of the Szego recurrence with a real coefficient.

    Phi_{n+1} = z Phi_n - alpha Phi_n*,  Phi_{n+1}* = Phi_n* - alpha z Phi_n.
    """
    _check_alpha(alpha)
    z_phi = np.concatenate(([0.0], pair.phi))
    star = np.concatenate((pair.phi_star, [0.0]))
    return MonicPair(z_phi - alpha * star, star - alpha * z_phi)


def monic_pairs(alphas):
    """Yield Phi_0, Phi_1, ..., Phi_N for N = len(alphas)."""
    pair = MonicPair.one()
    yield pair
    for a in _check_alphas(alphas):
        pair = szego_step(pair, a)
        yield pair


def monic_norm_sq(alphas, n=None):
    """||Phi_n||^2 = prod_{j<n} (1 - alpha_j^2); n defaults to len(alphas)."""
    alphas = _check_alphas(alphas)
    if n is None:
        n = alphas.size
    return float(np.prod(1.0 - alphas[:n] ** 2))


def orthonormal_sq_at_one(alphas):
    """Return phi_n(1)^2 for n = 0..len(alphas), starting from phi_0 = 1.

    This is the map from Verblunsky coefficients to the step heights of the
    associated det-normalized diagonal Hamiltonian.
    """
    alphas = _check_alphas(alphas)
    h = np.empty(alphas.size + 1)
    h[0] = 1.0
    for n, a in enumerate(alphas):
        # phi_{n+1}(1) = (1 - a) phi_n(1) / sqrt(1 - a^2), squared
        h[n + 1] = h[n] * (1.0 - a) / (1.0 + a)
    return h


def moments_from_verblunsky(alphas, c0=1.0):
    """Moments c_0..c_N of the measure with the given Verblunsky coefficients.

    Each Szego step produces Phi_{n+1}; orthogonality <Phi_{n+1}, 1> = 0 is a
    linear equation in the single new moment c_{n+1}, whose coefficient is
    the leading 1 of Phi_{n+1}.
    """
    if not c0 > 0:
        raise ValueError(f"c0 must be positive, got {c0!r}")
    alphas = _check_alphas(alphas)
    c = np.empty(alphas.size + 1)
    c[0] = 1.0
    pair = MonicPair.one()
    for n, a in enumerate(alphas):
        pair = szego_step(pair, a)
        c[n + 1] = -(pair.phi[: n + 1] @ c[: n + 1])
    return c0 * c


def verblunsky_from_moments(c, n=None):
    """Verblunsky coefficients alpha_0..alpha_{n-1} of the normalized measure.

    Uses alpha_n = <z Phi_n, 1> / ||Phi_n||^2, obtained by pairing the Szego
    recurrence with 1 and using <Phi_n*, 1> = ||Phi_n||^2.
    """
    c = np.asarray(c, dtype=float)
    if c.size == 0 or not c[0] > 0:
        raise NotPositiveDefinite(0)
    c = c / c[0]
    if n is None:
        n = c.size - 1
    alphas = np.empty(n)
    pair = MonicPair.one()
    norm = 1.0
    for k in range(n):
        # compensated sum: the inner product cancels down to alpha * norm
        a = math.fsum(pair.phi * c[1 : k + 2]) / norm
        if not abs(a) < 1.0:
            raise NotPositiveDefinite(k + 1)
        alphas[k] = a
        pair = szego_step(pair, a)
        norm *= 1.0 - a * a
    return alphas


def heine_monic_oracle(c, n):
    """Phi_n and ||Phi_n||^2 from the Heine determinant formulas.

    The determinant has the first n rows of J_n on top and (1, z, ..., z^n)
    as its last row; cofactor expansion along that row gives the
    coefficients. Only intended for small n.
    """
    c = np.asarray(c, dtype=float)
    if n > 8:
        raise ValueError("Heine oracle limited to n <= 8")
    if n == 0:
        return MonicPair.one(), 1.0
    c = c / c[0]
    j_n = build_toeplitz(c, n)
    det_prev = brute_det(j_n[:n, :n])
    det_n = brute_det(j_n)
    if not (det_prev > 0 and det_n > 0):
        raise NotPositiveDefinite(n)
    top = j_n[:n, :]
    phi = np.empty(n + 1)
    for j in range(n + 1):
        minor = np.delete(top, j, axis=1)
        try:
            cofactor = brute_det(minor)
        except Singular:
            cofactor = 0.0
        phi[j] = (-1) ** (n + j) * cofactor / det_prev
    return MonicPair(phi, reverse(phi)), det_n / det_prev


def _series_div(num, den):
    """Power series num/den truncated to len(num) terms (den[0] != 0)."""
    n = num.size
    lower = scipy.linalg.toeplitz(den[:n], np.zeros(n))
    return scipy.linalg.solve_triangular(lower, num, lower=True)


def schur_moments(alphas, c0=1.0):
    """Moments from Verblunsky coefficients through the Schur algorithm.

    The Schur function is rebuilt backwards, f_n = (alpha_n + z f_{n+1}) /
    (1 + alpha_n z f_{n+1}), as truncated power series; then
    F = (1 + z f_0) / (1 - z f_0) = 1 + 2 sum c_k z^k. Each step is a
    contractive Moebius map, so rounding does not grow with the order the way
    it does in the polynomial recursions; used as an independent oracle.
    """
    if not c0 > 0:
        raise ValueError(f"c0 must be positive, got {c0!r}")
    alphas = _check_alphas(alphas)
    n = alphas.size
    f = np.zeros(n)
    for a in alphas[::-1]:
        zf = np.concatenate(([0.0], f[:-1]))
        num = zf.copy()
        num[0] += a
        den = a * zf
        den[0] += 1.0
        f = _series_div(num, den)
    zf = np.concatenate(([0.0], f))
    num = zf.copy()
    num[0] += 1.0
    den = -zf
    den[0] += 1.0
    c = 0.5 * _series_div(num, den)
    c[0] = 1.0
    return c0 * c
