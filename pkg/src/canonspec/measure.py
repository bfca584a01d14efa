"""Even spectral measures: densities, atoms, and their trigonometric moments.

Circle measures live on [0, 2pi) with moments
c_k = (1/2pi) [int e^{-ikx} w(x) dx + sum_j m_j e^{-ik x_j}].
A step Hamiltonian with step s has a line measure of period pi/s whose
density is w_line(x) = w_circle(2 s x); atom masses scale by 1/(2s).
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure

__all__ = [
    "SpectralMeasure",
    "cosine_partial_sum",
    "rescale_to_line",
    "geronimus_measure",
    "geronimus_atom_coefficient",
    "expgrowth_alpha",
    "expgrowth_family",
    "expgrowth_support",
    "expgrowth_printed_support",
    "expgrowth_limit",
    "periodize_measure",
    "probability_normalize",
    "quadrature_moments",
    "density_csv",
    "atoms_csv",
]

TWO_PI = 2.0 * math.pi
QUAD_RTOL = 1e-8


@dataclass
class SpectralMeasure:
    """Density on a grid, optional closed form, and point masses.

    ``period`` is a line period, the string "circle", or None. ``support``
    lists the closed intervals (within one period) where the density can be
    nonzero; quadrature splits at their endpoints.
    """

    xs: np.ndarray
    w: np.ndarray
    atoms: List[Tuple[float, float]] = field(default_factory=list)
    period: Union[float, str, None] = None
    density: Optional[Callable] = None
    support: Optional[List[Tuple[float, float]]] = None

    def __call__(self, x):
        if self.density is None:
            raise ValueError("measure has no closed-form density")
        return self.density(x)


def _grid(xs):
    return np.asarray(xs, dtype=float)


def cosine_partial_sum(c, N, xs):
    """w_N(x) = c_0 + 2 sum_{n=1}^N c_n cos(n x) on the circle."""
    c = np.asarray(c, dtype=float)
    if N > c.size - 1:
        raise ValueError(f"need {N + 1} moments, got {c.size}")
    coeffs = c[: N + 1].copy()

    def density(x):
        x = np.asarray(x, dtype=float)
        n = np.arange(1, N + 1)
        return coeffs[0] + 2.0 * np.cos(np.multiply.outer(x, n)) @ coeffs[1:]

    xs = _grid(xs)
    return SpectralMeasure(xs, density(xs), period="circle", density=density, support=[(0.0, TWO_PI)])


def rescale_to_line(m, step, xs=None):
    """Line measure of period pi/step from a circle measure.

    The density is substituted without a Jacobian, w(x) = w*(2 step x), so
    uniform density 1 stays Lebesgue measure; atoms move to x/(2 step) with
    masses divided by 2 step.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    k = 2.0 * step
    density = None
    if m.density is not None:
        inner = m.density

        def density(x):
            return inner(k * np.asarray(x, dtype=float))

    if xs is None:
        xs = m.xs / k
        w = m.w.copy()
    else:
        xs = _grid(xs)
        w = density(xs) if density is not None else np.interp(k * xs, m.xs, m.w, period=TWO_PI)
    atoms = [(loc / k, mass / k) for loc, mass in m.atoms]
    support = None if m.support is None else [(lo / k, hi / k) for lo, hi in m.support]
    return SpectralMeasure(xs, w, atoms, period=math.pi / step, density=density, support=support)


def geronimus_atom_coefficient(alpha):
    """The point-mass coefficient (2/|1+alpha|^2)(|alpha + 1/2|^2 - 1/4), normalized to dmu/2pi."""
    return 2.0 / abs(1.0 + alpha) ** 2 * (abs(alpha + 0.5) ** 2 - 0.25)


def geronimus_measure(alpha, xs=None):
    """Probability measure with constant real Verblunsky coefficient ``alpha``.

    Absolutely continuous part on [2 arcsin|alpha|, 2pi - 2 arcsin|alpha|],
    plus an atom at x = 0 when alpha > 0. The atom coefficient is relative to
    dmu/2pi, so the stored mass (in dx units) is 2pi times it.
    """
    if not abs(alpha) < 1:
        raise ValueError(f"|alpha| must be < 1, got {alpha!r}")
    lo = 2.0 * math.asin(abs(alpha))
    hi = TWO_PI - lo
    scale = 1.0 / abs(1.0 + alpha)
    r2 = 1.0 - alpha * alpha

    def density(x):
        x = np.mod(np.asarray(x, dtype=float), TWO_PI)
        half = 0.5 * x
        s = np.sin(half)
        inside = (x > lo) & (x < hi)
        rad = np.where(inside, np.maximum(r2 - np.cos(half) ** 2, 0.0), 0.0)
        return np.where(inside, scale * np.sqrt(rad) / np.where(inside, s, 1.0), 0.0)

    atoms = []
    if alpha > 0:
        atoms.append((0.0, TWO_PI * geronimus_atom_coefficient(alpha)))
    xs = np.linspace(0.0, TWO_PI, 1025) if xs is None else _grid(xs)
    return SpectralMeasure(xs, density(xs), atoms, period="circle", density=density, support=[(lo, hi)])


def expgrowth_alpha(T):
    """Constant Verblunsky coefficient of the step approximation of h11 = e^t."""
    return (1.0 - math.exp(T)) / (1.0 + math.exp(T))


def expgrowth_support(T):
    """Support [arcsin|alpha|/T, pi/T - arcsin|alpha|/T] on one period."""
    edge = math.asin(abs(expgrowth_alpha(T))) / T
    return edge, math.pi / T - edge


def expgrowth_printed_support(T):
    """Support endpoints with the sign of alpha kept inside arcsin."""
    edge = math.asin(expgrowth_alpha(T)) / T
    return edge, math.pi / T - edge


def expgrowth_family(T, xs):
    """Density of the spectral measure of the step approximation of h11 = e^t.

    w(x) = T(e^T + 1) / (2(e^T - 1)) * sqrt(4e^T/(e^T + 1)^2 - cos^2(Tx)) / |sin(Tx)|
    on the support (extended evenly and with period pi/T); no atoms.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    eT = math.exp(T)
    pref = T * (eT + 1.0) / (2.0 * (eT - 1.0))
    r2 = 4.0 * eT / (eT + 1.0) ** 2
    lo, hi = expgrowth_support(T)
    period = math.pi / T

    def density(x):
        x = np.mod(np.abs(np.asarray(x, dtype=float)), period)
        inside = (x > lo) & (x < hi)
        s = np.abs(np.sin(T * x))
        rad = np.where(inside, np.maximum(r2 - np.cos(T * x) ** 2, 0.0), 0.0)
        return np.where(inside, pref * np.sqrt(rad) / np.where(inside, s, 1.0), 0.0)

    xs = _grid(xs)
    return SpectralMeasure(xs, density(xs), [], period=period, density=density, support=[(lo, hi)])


def expgrowth_limit(xs):
    """sqrt(4x^2 - 1) / (2|x|) on |x| >= 1/2, zero elsewhere."""

    def density(x):
        x = np.abs(np.asarray(x, dtype=float))
        inside = x >= 0.5
        rad = np.where(inside, 4.0 * x * x - 1.0, 0.0)
        return np.where(inside, np.sqrt(rad) / (2.0 * np.where(inside, x, 1.0)), 0.0)

    xs = _grid(xs)
    return SpectralMeasure(xs, density(xs), [], period=None, density=density)


def _quad(fn, a, b, weight=None, wvar=None, breakpoints=()):
    pts = sorted(p for p in breakpoints if a < p < b)
    edges = [a] + pts + [b]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        with warnings.catch_warnings():
            # judged by the returned error estimate instead
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            if weight is None:
                val, err = integrate.quad(fn, lo, hi, epsabs=1e-13, epsrel=QUAD_RTOL, limit=400)
            else:
                val, err = integrate.quad(fn, lo, hi, weight=weight, wvar=wvar, epsabs=1e-13, epsrel=QUAD_RTOL, limit=400)
        if not math.isfinite(val) or err > max(1e-9, 1e3 * QUAD_RTOL * abs(val)):
            raise QuadratureFailure(f"quadrature on [{lo:.6g}, {hi:.6g}] reported error {err:.3g}")
        total += val
    return total


def _graded(lo, hi, depth=8):
    """Breakpoints clustering geometrically at both ends of [lo, hi].

    Square-root edges narrower than the interval are otherwise missed by
    the adaptive rule, and its error estimate misses them too.
    """
    width = hi - lo
    offsets = width * 10.0 ** -np.arange(1, depth + 1)
    return tuple(lo + offsets) + tuple(hi - offsets)


def periodize_measure(density, atoms, period, n, breakpoints=()):
    """Fourier coefficients of the periodization of a line measure.

    The measure restricted to the window [-period/2, period/2) is repeated
    with the given period, and
    c_k = (1/2pi) [int_window e^{-2pi i k x / period} w(x) dx + sum m e^{...}],
    real because the measure is even.
    """
    half = 0.5 * period
    omega = TWO_PI / period
    pts = tuple(breakpoints) + (0.0,)
    c = np.empty(n + 1)
    for k in range(n + 1):
        if density is None:
            integral = 0.0
        elif k == 0:
            integral = _quad(lambda x: float(density(x)), -half, half, breakpoints=pts)
        else:
            integral = _quad(lambda x: float(density(x)), -half, half, weight="cos", wvar=k * omega, breakpoints=pts)
        point = sum(m * math.cos(k * omega * x0) for x0, m in atoms if -half <= x0 < half)
        c[k] = (integral + point) / TWO_PI
    return c


def probability_normalize(c):
    c = np.asarray(c, dtype=float)
    if not c[0] > 0:
        raise ValueError("c_0 must be positive")
    return c / c[0], float(c[0])


def quadrature_moments(m, n, report=None):
    """Moments c_0..c_n of a circle measure by adaptive quadrature.

    Imaginary parts are computed, recorded in ``report['max_imag']`` when a
    dict is passed, and then dropped.
    """
    if m.density is None:
        raise QuadratureFailure("quadrature needs a closed-form density")
    support = m.support or [(0.0, TWO_PI)]
    c = np.empty(n + 1)
    max_imag = 0.0
    fn = lambda x: float(m.density(x))  # noqa: E731
    for k in range(n + 1):
        re = im = 0.0
        for lo, hi in support:
            pts = _graded(lo, hi)
            if k == 0:
                re += _quad(fn, lo, hi, breakpoints=pts)
            else:
                re += _quad(fn, lo, hi, weight="cos", wvar=k, breakpoints=pts)
                im -= _quad(fn, lo, hi, weight="sin", wvar=k, breakpoints=pts)
        for x0, mass in m.atoms:
            re += mass * math.cos(k * x0)
            im -= mass * math.sin(k * x0)
        c[k] = re / TWO_PI
        max_imag = max(max_imag, abs(im) / TWO_PI)
    if report is not None:
        report["max_imag"] = max_imag
    return c


def density_csv(xs, columns):
    """CSV text with header ``x,<names...>``; values use 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    writer.writerow(["x"] + names)
    data = [np.asarray(columns[k], dtype=float) for k in names]
    for i, x in enumerate(np.asarray(xs, dtype=float)):
        writer.writerow([f"{x:.17g}"] + [f"{col[i]:.17g}" for col in data])
    return buf.getvalue()


def atoms_csv(atoms):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["location", "mass"])
    for loc, mass in atoms:
        writer.writerow([f"{loc:.17g}", f"{mass:.17g}"])
    return buf.getvalue()
