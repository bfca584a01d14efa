"""Canonical systems with diagonal det-normalized Hamiltonians.

H(t) = diag(h(t), 1/h(t)). The system Omega X' = z H X becomes
X' = z [[0, -1/h], [h, 0]] X, which is solved exactly on each step of a step
Hamiltonian. Real Dirac systems with potential f are handled through the
scattering equation d/dt S = f(t) exp(2itx) conj(S), S(0) = 1.

Dirac coordinates relate to canonical ones by X = diag(g, 1/g) Y with
g(t) = exp(int_0^t f), so the canonical Hamiltonian of a Dirac system is
h(t) = g(t)^2 = exp(2 int_0^t f).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .errors import GridTooSmall, InvalidHamiltonian, InvalidPotential, QuadratureFailure

__all__ = [
    "StepHamiltonian",
    "DiracPotential",
    "BoundaryValueGrid",
    "SincKernel",
    "periodize",
    "matrizant_constant_step",
    "matrizant",
    "hermite_biehler",
    "scattering_rk4",
    "dirac_step_matrizant",
    "dirac_step_boundary",
    "dirac_to_canonical",
    "canonical_to_dirac",
    "weight_grid",
    "pw_norm",
    "pw_inner",
    "default_sinc_set",
    "periodized_sinc_sq",
    "periodic_pw_norm",
    "ConvergenceRow",
    "convergence_experiment",
    "is_strictly_decreasing",
]

PERIODIZE_RTOL = 1e-10


@dataclass(frozen=True)
class StepHamiltonian:
    """Uniform-step diagonal Hamiltonian: h11 = heights[n] on [n*step, (n+1)*step)."""

    step: float
    heights: np.ndarray

    def __post_init__(self):
        heights = np.asarray(self.heights, dtype=float).ravel()
        if not self.step > 0:
            raise InvalidHamiltonian(f"step must be positive, got {self.step!r}")
        if heights.size == 0 or not np.all(np.isfinite(heights) & (heights > 0)):
            raise InvalidHamiltonian("step heights must be positive and finite")
        object.__setattr__(self, "heights", heights)

    @property
    def length(self):
        return self.step * self.heights.size

    @property
    def h22(self):
        return 1.0 / self.heights

    @property
    def line_period(self):
        """Period pi/step of the spectral measure on the real line."""
        return math.pi / self.step

    @classmethod
    def free(cls, length, step=0.5):
        n = max(1, int(round(length / step)))
        return cls(step, np.ones(n))


class DiracPotential:
    """Real potential f of a Dirac system on [0, a].

    Either a closed-form callable or a sample table (linear interpolation).
    """

    def __init__(self, f, a, name="f", antiderivative=None):
        if not a > 0:
            raise InvalidPotential(f"horizon must be positive, got {a!r}")
        self.a = float(a)
        self.name = name
        self._f = f
        self._F = antiderivative

    @classmethod
    def from_samples(cls, t, values, name="samples"):
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != values.shape or t.size < 2:
            raise InvalidPotential("sample table needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(t) <= 0):
            raise InvalidPotential("sample abscissae must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise InvalidPotential("sample table contains non-finite values")

        def f(s):
            return np.interp(s, t, values)

        if t[0] > 0:
            raise InvalidPotential("sample table must start at t <= 0")
        return cls(f, t[-1], name=name)

    @classmethod
    def step(cls, values, width, name="step"):
        """Piecewise-constant f = values[n] on [n*width, (n+1)*width).

        ``left_limit`` lets fixed-step integrators use the value of the step
        that ends at a node rather than the one starting there.
        """
        values = np.asarray(values, dtype=float).ravel()
        if not width > 0 or values.size == 0 or not np.all(np.isfinite(values)):
            raise InvalidPotential("step potential needs finite values and a positive width")
        last = values.size - 1

        def index(t, left):
            k = np.floor(np.asarray(t, dtype=float) / width + 1e-9)
            if left:
                k = np.ceil(np.asarray(t, dtype=float) / width - 1e-9) - 1
            return np.clip(k, 0, last).astype(int)

        def antiderivative(t):
            k = int(index(t, True))
            return float(width * values[:k].sum() + values[k] * (t - k * width))

        obj = cls(lambda t: values[index(t, False)], width * values.size, name=name, antiderivative=antiderivative)
        obj.values = values
        obj.width = float(width)
        obj.left_limit = lambda t: values[index(t, True)]
        return obj

    def __call__(self, t):
        value = self._f(t)
        if not np.all(np.isfinite(value)):
            raise InvalidPotential(f"potential {self.name} is not finite near t = {t!r}")
        return value

    def integral(self, t):
        """int_0^t f."""
        if t == 0:
            return 0.0
        if self._F is not None:
            return self._F(t) - self._F(0.0)
        value, _ = integrate.quad(lambda s: float(self(s)), 0.0, t, epsabs=1e-13, epsrel=1e-12, limit=200)
        return value

    def abs_integral(self, t=None):
        t = self.a if t is None else t
        value, _ = integrate.quad(lambda s: abs(float(self(s))), 0.0, t, epsabs=1e-13, epsrel=1e-12, limit=200)
        if not math.isfinite(value):
            raise InvalidPotential(f"int |f| is not finite for {self.name}")
        return value

    def h11(self, t):
        """Canonical Hamiltonian entry exp(2 int_0^t f)."""
        return math.exp(2.0 * self.integral(t))


@dataclass
class BoundaryValueGrid:
    """E(a, x) on a real grid and the weight 1/|E(a, x)|^2."""

    a: float
    xs: np.ndarray
    E_vals: np.ndarray

    @property
    def weight(self):
        return 1.0 / np.abs(self.E_vals) ** 2


def periodize(h11, T, N, rtol=PERIODIZE_RTOL):
    """Step approximation with heights (1/T) int_{nT}^{(n+1)T} h11, n < N."""
    if not T > 0:
        raise InvalidHamiltonian(f"step T must be positive, got {T!r}")
    if N < 1:
        raise InvalidHamiltonian("need at least one step")

    def integrand(s):
        value = float(h11(s))
        if not (math.isfinite(value) and value > 0):
            raise InvalidHamiltonian(f"h11({s:.6g}) = {value!r} is not positive and finite")
        return value

    heights = np.empty(N)
    for n in range(N):
        value, err = integrate.quad(integrand, n * T, (n + 1) * T, epsabs=0.0, epsrel=rtol, limit=200)
        if not math.isfinite(value) or err > 10 * rtol * abs(value) + 1e-300:
            raise QuadratureFailure(f"periodization of step {n} did not converge (err {err:.3g})")
        heights[n] = value / T
    return StepHamiltonian(T, heights)


def matrizant_constant_step(h, length, z):
    """exp(z * length * [[0, -1/h], [h, 0]]); z may be an array.

    The generator squares to -identity, so the exponential is
    cos(z L) I + sin(z L) [[0, -1/h], [h, 0]].
    """
    z = np.asarray(z, dtype=complex)
    c = np.cos(z * length)
    s = np.sin(z * length)
    out = np.empty(z.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s / h
    out[..., 1, 0] = h * s
    out[..., 1, 1] = c
    return out


def matrizant(H, t, z):
    """Transfer matrix M(t, z) of a step Hamiltonian, M(0, z) = I."""
    if not (0.0 <= t <= H.length * (1 + 1e-12)):
        raise ValueError(f"t = {t!r} outside [0, {H.length}]")
    z = np.asarray(z, dtype=complex)
    m = np.broadcast_to(np.eye(2, dtype=complex), z.shape + (2, 2)).copy()
    remaining = t
    for h in H.heights:
        if remaining <= 0:
            break
        length = min(H.step, remaining)
        m = matrizant_constant_step(h, length, z) @ m
        remaining -= length
    return m


def hermite_biehler(M, condition="neumann"):
    """E = u - i v from the first (Neumann) or second (Dirichlet) column."""
    M = np.asarray(M)
    col = {"neumann": 0, "dirichlet": 1}[condition.lower()]
    return M[..., 0, col] - 1j * M[..., 1, col]


def scattering_rk4(f, a, x, dt):
    """Integrate d/dt S = f(t) exp(2itx) conj(S), S(0) = 1, up to t = a.

    Classical RK4 with a fixed step (a is split into round(a/dt) equal
    steps). ``x`` may be an array; returns S(a, x). E(a, x) = exp(-iax) S.
    """
    if not (dt > 0 and a > 0):
        raise ValueError("a and dt must be positive")
    steps = max(1, int(round(a / dt)))
    dt = a / steps
    x = np.asarray(x, dtype=float)
    s = np.ones(x.shape, dtype=complex)

    left = getattr(f, "left_limit", None)

    def fval(t, from_left=False):
        value = float(left(t) if from_left and left is not None else f(t))
        if not math.isfinite(value):
            raise InvalidPotential(f"potential is not finite at t = {t!r}")
        return value

    def rhs(t, fv, y):
        return fv * np.exp(2j * t * x) * np.conj(y)

    for k in range(steps):
        t = k * dt
        f0 = fval(t)
        fm = fval(t + 0.5 * dt)
        f1 = fval(t + dt, from_left=True)
        k1 = rhs(t, f0, s)
        k2 = rhs(t + 0.5 * dt, fm, s + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, fm, s + 0.5 * dt * k2)
        k4 = rhs(t + dt, f1, s + dt * k3)
        s = s + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return s


def dirac_step_matrizant(f, length, z):
    """Transfer matrix over a step where the Dirac potential is the constant f.

    In Dirac coordinates X' = [[f, -z], [z, -f]] X. The generator A squares
    to (f^2 - z^2) I, so exp(L A) = cosh(wL) I + sinh(wL)/w A, w^2 = f^2 - z^2.
    """
    z = np.asarray(z, dtype=complex)
    w = np.sqrt(f * f - z * z + 0j)
    c = np.cosh(w * length)
    small = np.abs(w) < 1e-8
    s = np.where(small, length, np.sinh(w * length) / np.where(small, 1.0, w))
    out = np.empty(z.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c + s * f
    out[..., 0, 1] = -s * z
    out[..., 1, 0] = s * z
    out[..., 1, 1] = c - s * f
    return out


def dirac_step_boundary(f, x):
    """E(a, x) in Dirac coordinates for a step potential, by exact products."""
    x = np.asarray(x, dtype=float)
    m = np.broadcast_to(np.eye(2, dtype=complex), x.shape + (2, 2)).copy()
    for value in f.values:
        m = dirac_step_matrizant(value, f.width, x) @ m
    return hermite_biehler(m)


def dirac_to_canonical(E_dirac, g):
    """Rewrite E = u - iv from Dirac coordinates to canonical ones.

    With X = diag(g, 1/g) Y the canonical solution is (u/g, v*g).
    """
    u = E_dirac.real
    v = -E_dirac.imag
    return u / g - 1j * v * g


def canonical_to_dirac(E_canonical, g):
    y1 = E_canonical.real
    y2 = -E_canonical.imag
    return g * y1 - 1j * y2 / g


def weight_grid(source, a, xs, dt=None, gauge=None):
    """Boundary values E(a, x) and weights 1/|E|^2 on a real grid.

    Step Hamiltonians use the exact matrizant and report E in canonical
    coordinates unless ``gauge`` = g is given, in which case E is moved to
    Dirac coordinates X = diag(g, 1/g) Y. Dirac potentials use RK4 on the
    scattering equation (dt defaults to 1e-3 * a) and report E in Dirac
    coordinates, or in canonical ones with ``gauge="canonical"``.
    The gauge changes the weight pointwise but not the norms of PW_b, b <= a.
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) < 0) or not np.all(np.isfinite(xs)):
        raise ValueError("grid must be finite and sorted")
    if isinstance(source, StepHamiltonian):
        E = hermite_biehler(matrizant(source, a, xs))
        if gauge is not None:
            E = canonical_to_dirac(E, gauge)
    elif isinstance(source, DiracPotential):
        dt = 1e-3 * a if dt is None else dt
        S = scattering_rk4(source, a, xs, dt)
        E = np.exp(-1j * a * xs) * S
        if gauge == "canonical":
            E = dirac_to_canonical(E, math.exp(source.integral(a)))
        elif gauge is not None:
            raise ValueError(f"unknown gauge {gauge!r} for a Dirac potential")
    else:
        raise TypeError(f"unsupported source {type(source).__name__}")
    return BoundaryValueGrid(a=a, xs=xs, E_vals=E)


@dataclass(frozen=True)
class SincKernel:
    """Reproducing kernel sin(b(x - lam)) / (pi (x - lam)) of PW_b."""

    b: float
    lam: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float) - self.lam
        return self.b / math.pi * np.sinc(self.b * x / math.pi)

    def tail_bound(self, X):
        """Bound on int_{|x - lam| > X} |phi|^2 dx (uses |phi| <= 1/(pi|x - lam|))."""
        return 2.0 / (math.pi**2 * X)


def default_sinc_set(a):
    return (SincKernel(a, 0.0), SincKernel(a / 2, 1.0), SincKernel(a, 0.5))


def _trapezoid(y, x):
    return float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))


def pw_inner(phi, psi, grid):
    """Trapezoid approximation of int phi psi weight dx (real test functions)."""
    return _trapezoid(phi(grid.xs) * psi(grid.xs) * grid.weight, grid.xs)


def pw_norm(phi, grid, tail_tol=0.1, far_weight=None):
    """||phi||^2 in L^2(weight(x) dx) by trapezoid quadrature on the grid.

    With ``far_weight`` = w_inf the weight is taken as w_inf outside the grid
    and the exterior contribution w_inf * (b/pi - int_grid |phi|^2) is added;
    without it the exterior is dropped. Either way the neglected part is
    bounded by the sinc decay times max |weight - w_inf| over the outer tenth
    of the grid, and ``GridTooSmall`` is raised when that exceeds
    ``tail_tol``.
    """
    xs = grid.xs
    w = grid.weight
    far = 0.0 if far_weight is None else float(far_weight)
    phi2 = np.abs(phi(xs)) ** 2
    if hasattr(phi, "tail_bound"):
        edge = max(1, xs.size // 10)
        excess = max(np.abs(w[:edge] - far).max(), np.abs(w[-edge:] - far).max())
        X = min(xs[-1] - phi.lam, phi.lam - xs[0])
        if X <= 0:
            raise GridTooSmall("grid does not contain the kernel centre")
        tail = phi.tail_bound(X) * excess
        if tail > tail_tol:
            raise GridTooSmall(f"estimated tail {tail:.3g} exceeds tolerance {tail_tol:.3g}")
    if far_weight is None:
        return _trapezoid(phi2 * w, xs)
    return far * phi.b / math.pi + _trapezoid(phi2 * (w - far), xs)


def periodized_sinc_sq(phi, x, period, terms=200):
    """sum_k |phi(x + k * period)|^2 for a sinc kernel.

    When m = b * period / pi is an integer the sum is exactly
    (sin(m u) / sin(u))^2 / period^2 with u = pi (x - lam) / period.
    Otherwise: explicit sum over |k| <= terms, remainder with sin^2 ~ 1/2 and
    the trigamma closed form of sum 1/(y + kP)^2.
    """
    y = np.asarray(x, dtype=float) - phi.lam
    m = phi.b * period / math.pi
    if abs(m - round(m)) < 1e-12 and round(m) > 0:
        m = int(round(m))
        u = math.pi * y / period
        den = np.sin(u)
        safe = np.abs(den) > 1e-8
        ratio = np.where(safe, np.sin(m * u) / np.where(safe, den, 1.0), float(m))
        return ratio**2 / period**2
    ks = np.arange(-terms, terms + 1)
    shifted = y[..., None] + ks * period
    total = (np.abs(phi(shifted + phi.lam)) ** 2).sum(axis=-1)
    k0 = terms + 1
    rest = special.polygamma(1, (y + k0 * period) / period) + special.polygamma(1, (k0 * period - y) / period)
    return total + rest / (2.0 * math.pi**2 * period**2)


def periodic_pw_norm(phi, H, a, gauge=None, samples=8192):
    """||phi||^2 for the pi/step periodic spectral measure of a step Hamiltonian.

    Folds |phi|^2 onto one period, where the trapezoid rule on the smooth
    periodic integrand converges quickly; no truncation of the line.
    """
    period = H.line_period
    x = np.linspace(0.0, period, samples, endpoint=False)
    w = weight_grid(H, a, x, gauge=gauge).weight
    return float(np.mean(w * periodized_sinc_sq(phi, x, period)) * period)


@dataclass
class ConvergenceRow:
    T: float
    sup_weight_diff: float
    norm_diffs: list

    def to_dict(self):
        return {"T": self.T, "sup_weight_diff": self.sup_weight_diff, "norm_diffs": list(self.norm_diffs)}


def is_strictly_decreasing(values):
    values = list(values)
    return all(b < a for a, b in zip(values, values[1:]))


def convergence_experiment(f, a, Ts, xs, phis=None, dt=None, tail_tol=0.1):
    """Compare step approximations H^T with the Dirac system of ``f``.

    Weights of both systems are taken in the Dirac coordinates of ``f`` at
    t = a and compared on ``xs``. Norms use the whole line: the Dirac weight
    tends to 1 at infinity (exterior added analytically) and the step weight
    is periodic (folded onto one period).

    Returns ``(rows, reference_norms)``; each row holds the sup-norm weight
    difference on ``xs`` and |norm_T - norm| for every test function.
    """
    xs = np.asarray(xs, dtype=float)
    phis = default_sinc_set(a) if phis is None else phis
    reference = weight_grid(f, a, xs, dt=dt)
    ref_norms = [pw_norm(phi, reference, tail_tol, far_weight=1.0) for phi in phis]
    g = math.exp(f.integral(a))
    rows = []
    for T in Ts:
        N = int(round(a / T))
        if not math.isclose(N * T, a, rel_tol=1e-9):
            raise ValueError(f"step {T!r} does not divide horizon {a!r}")
        H = periodize(f.h11, T, N)
        approx = weight_grid(H, a, xs, gauge=g)
        sup = float(np.max(np.abs(approx.weight - reference.weight)))
        diffs = [abs(periodic_pw_norm(phi, H, a, gauge=g) - ref) for phi, ref in zip(phis, ref_norms)]
        rows.append(ConvergenceRow(T=T, sup_weight_diff=sup, norm_diffs=diffs))
    return rows, ref_norms
