"""Truncated Toeplitz matrices of real (even) moment sequences.

J_n is the (n+1) x (n+1) matrix with entries c_{j-i}, indices starting at 0,
and c_{-k} = c_k. The recursions below grow J_n^{-1} and det(J_n) one order
at a time; the ``brute_*`` helpers are dense oracles used to check them.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import InsufficientMoments, NotPositiveDefinite, Singular

__all__ = [
    "PD_THRESHOLD",
    "ORACLE_MAX_SIZE",
    "ToeplitzState",
    "Positivity",
    "build_toeplitz",
    "initial_state",
    "det_step",
    "bordered_det",
    "apply_inverse",
    "trench_update",
    "check_positive_definite",
    "brute_det",
    "brute_inverse",
]

# Delta_n at or below this value is treated as loss of positive definiteness.
PD_THRESHOLD = 1e-12
ORACLE_MAX_SIZE = 12
# Residual-correction passes for J^{-1} x; J_n is ill conditioned when Delta_n is small.
REFINE_STEPS = 2


def _as_moments(c):
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise InsufficientMoments("moment sequence must be a non-empty 1-d array")
    return c


def build_toeplitz(c, n):
    """Return J_n, the (n+1) x (n+1) symmetric Toeplitz matrix of ``c``."""
    c = _as_moments(c)
    if n < 0 or c.size < n + 1:
        raise InsufficientMoments(f"J_{n} needs {n + 1} moments, got {c.size}")
    return scipy.linalg.toeplitz(c[: n + 1])


@dataclass(frozen=True)
class ToeplitzState:
    """J_n^{-1} together with det(J_n) and Delta_n = det(J_n)/det(J_{n-1}).

    ``moments`` holds the normalized c_0..c_n that define J_n.
    """

    n: int
    inv: np.ndarray
    det: float
    delta: float
    moments: np.ndarray

    @property
    def matrix(self):
        return scipy.linalg.toeplitz(self.moments)


def initial_state():
    """State for J_0 = [1] (normalized moments)."""
    return ToeplitzState(n=0, inv=np.ones((1, 1)), det=1.0, delta=1.0, moments=np.ones(1))


def apply_inverse(state, rhs, refine=REFINE_STEPS):
    """J_n^{-1} rhs, polished by ``refine`` rounds of iterative refinement."""
    rhs = np.asarray(rhs, dtype=float)
    x = state.inv @ rhs
    if refine and state.n > 0:
        j = state.matrix
        for _ in range(refine):
            x = x + state.inv @ (rhs - j @ x)
    return x


def det_step(prev, c0, v_n):
    """det(J_n) = det(J_{n-1}) * (c0 - v_n^T J_{n-1}^{-1} v_n).

    ``v_n`` is the reversed moment column (c_n, ..., c_1). The result may be
    non-positive; that is left for the caller to interpret.
    """
    v_n = np.asarray(v_n, dtype=float)
    return prev.det * (c0 - v_n @ prev.inv @ v_n)


def bordered_det(prev, v_n):
    """Determinant of the bordered matrix [[J_{n-1}, v_n], [1 ... 1, 1]]."""
    v_n = np.asarray(v_n, dtype=float)
    ones = np.ones(v_n.size)
    return prev.det * (1.0 - ones @ prev.inv @ v_n)


def trench_update(prev, u_n, threshold=PD_THRESHOLD, refine=REFINE_STEPS):
    """Grow J_{n-1}^{-1} to J_n^{-1} for normalized moments (c_0 = 1).

    ``u_n`` is (c_1, ..., c_n). J_n is partitioned as [[1, u^T], [u, J_{n-1}]]
    and the inverse is assembled blockwise from g = J_{n-1}^{-1} u and
    Delta_n = 1 - u^T g.
    """
    u_n = np.asarray(u_n, dtype=float)
    n = prev.n + 1
    if u_n.shape != (n,):
        raise ValueError(f"u_n must have length {n}, got shape {u_n.shape}")
    g = apply_inverse(prev, u_n, refine)
    delta = 1.0 - u_n @ g
    if not delta > threshold:
        raise NotPositiveDefinite(n, delta)
    inv = np.empty((n + 1, n + 1))
    inv[0, 0] = 1.0 / delta
    inv[0, 1:] = -g / delta
    inv[1:, 0] = -g / delta
    inv[1:, 1:] = prev.inv + np.outer(g, g) / delta
    moments = np.concatenate((prev.moments, u_n[-1:]))
    return ToeplitzState(n=n, inv=inv, det=prev.det * delta, delta=delta, moments=moments)


@dataclass(frozen=True)
class Positivity:
    """Outcome of the Caratheodory-Toeplitz test.

    ``failed_at`` is the first order n with Delta_n <= threshold, or None
    when every J_n up to ``checked`` is positive definite.
    """

    checked: int
    failed_at: Optional[int] = None
    min_delta: float = 1.0

    @property
    def valid(self):
        return self.failed_at is None

    def describe(self):
        if self.valid:
            return f"valid through {self.checked}"
        return f"fails at order {self.failed_at}"


def check_positive_definite(c, threshold=PD_THRESHOLD):
    c = _as_moments(c)
    if not c[0] > 0:
        return Positivity(checked=0, failed_at=0, min_delta=float(c[0]))
    c = c / c[0]
    state = initial_state()
    min_delta = 1.0
    for n in range(1, c.size):
        try:
            state = trench_update(state, c[1 : n + 1], threshold=threshold)
        except NotPositiveDefinite as exc:
            return Positivity(checked=n, failed_at=n, min_delta=min(min_delta, exc.value))
        min_delta = min(min_delta, state.delta)
    return Positivity(checked=c.size - 1, min_delta=min_delta)


def _square(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if a.shape[0] > ORACLE_MAX_SIZE:
        raise ValueError(f"oracle limited to size {ORACLE_MAX_SIZE}, got {a.shape[0]}")
    return a


def _lu(a):
    with warnings.catch_warnings():
        # exact singularity is reported below as Singular
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    diag = np.diag(lu)
    scale = max(np.abs(a).max(), 1.0)
    if np.any(np.abs(diag) <= 1e-14 * scale):
        raise Singular("matrix is singular to working precision")
    return lu, piv


def brute_det(a):
    """Determinant by partial-pivoted LU."""
    a = _square(a)
    lu, piv = _lu(a)
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    return float((-1) ** swaps * np.prod(np.diag(lu)))


def brute_inverse(a):
    a = _square(a)
    lu, piv = _lu(a)
    return scipy.linalg.lu_solve((lu, piv), np.eye(a.shape[0]))
