"""Direct spectral problem for diagonal step Hamiltonians.

Given step heights h^n = phi_n(1)^2, recover the even spectral measure on
the circle in two independent ways: through its Verblunsky coefficients and
directly through its trigonometric moments.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InvalidHeights
from .opuc import moments_from_verblunsky, orthonormal_sq_at_one
from .toeplitz import Positivity, apply_inverse, check_positive_definite, initial_state, trench_update

__all__ = [
    "MomentStep",
    "RecoveryReport",
    "validate_heights",
    "recover_verblunsky",
    "recover_moments",
    "recover_moments_trace",
    "cross_validate",
]

CROSS_TOL = 1e-9


def validate_heights(h):
    h = np.asarray(h, dtype=float).ravel()
    if h.size == 0:
        raise InvalidHeights(0, None)
    for n, value in enumerate(h):
        if not (np.isfinite(value) and value > 0):
            raise InvalidHeights(n, float(value))
    return h


def recover_verblunsky(h):
    """alpha_n = (1 - r) / (1 + r) with r = h^{n+1} / h^n."""
    h = validate_heights(h)
    r = h[1:] / h[:-1]
    return (1.0 - r) / (1.0 + r)


@dataclass(frozen=True)
class MomentStep:
    """Intermediate quantities of one moment-recovery step (normalized run).

    ``n`` is the order of the Toeplitz block J_{n-1}^{-1} used to produce
    c_{n+1}; ``border`` is 1 - 1^T J_{n-1}^{-1} u_n.
    """

    n: int
    delta: float
    d: float
    border: float
    c_next: float


def recover_moments_trace(h):
    """Normalized moments and the per-step quantities of the recursion.

    Returns ``(c_tilde, steps)`` where c_tilde[0] = 1 and heights were divided
    by h^0. For n >= 1, with u = (c_1..c_n), v = reversed u,
    Delta = 1 - u^T J^{-1} u, D = u^T J^{-1} v, s = 1 - 1^T J^{-1} u and the
    next height H:

        c_{n+1} = [(1 + D/Delta) s^2 - (Delta - D) H] / [H + s^2/Delta]

    which is the unique root of H = s^2 L / (c_{n+1} + Delta - D) with
    L = 1 - (c_{n+1} - D)/Delta.
    """
    h = validate_heights(h)
    ht = h / h[0]
    c = np.empty(ht.size)
    c[0] = 1.0
    steps: List[MomentStep] = []
    if ht.size == 1:
        return c, steps
    c[1] = (1.0 - ht[1]) / (1.0 + ht[1])
    state = initial_state()
    for n in range(1, ht.size - 1):
        u = c[1 : n + 1]
        v = u[::-1]
        new_state = trench_update(state, u)
        inv_u = apply_inverse(state, u)
        delta = new_state.delta
        d = inv_u @ v
        s = 1.0 - inv_u.sum()
        s2 = s * s
        big_h = ht[n + 1]
        c[n + 1] = ((1.0 + d / delta) * s2 - (delta - d) * big_h) / (big_h + s2 / delta)
        steps.append(MomentStep(n=n, delta=delta, d=d, border=s, c_next=c[n + 1]))
        state = new_state
    return c, steps


def recover_moments(h):
    """Moments c_0..c_N of the spectral measure on the circle; c_0 = 1/h^0."""
    h = validate_heights(h)
    c_tilde, _ = recover_moments_trace(h)
    return c_tilde / h[0]


@dataclass
class RecoveryReport:
    heights: np.ndarray
    alphas: np.ndarray
    moments: np.ndarray
    moments_from_alphas: np.ndarray
    max_cross_error: float
    positivity: Positivity
    heights_roundtrip_error: float
    tol: float = CROSS_TOL
    flags: List[str] = field(default_factory=list)

    @property
    def consistent(self):
        return not self.flags

    def to_dict(self):
        return {
            "heights": self.heights.tolist(),
            "alphas": self.alphas.tolist(),
            "moments": self.moments.tolist(),
            "moments_from_alphas": self.moments_from_alphas.tolist(),
            "max_cross_error": self.max_cross_error,
            "heights_roundtrip_error": self.heights_roundtrip_error,
            "positivity": {
                "valid": self.positivity.valid,
                "checked": self.positivity.checked,
                "failed_at": self.positivity.failed_at,
                "min_delta": self.positivity.min_delta,
            },
            "tol": self.tol,
            "flags": list(self.flags),
        }


def cross_validate(h, tol=CROSS_TOL):
    """Run both recovery routes and compare them.

    Problems are recorded in ``flags`` rather than raised, except for the
    moment route itself failing on a non positive definite step.
    """
    h = validate_heights(h)
    alphas = recover_verblunsky(h)
    c0 = 1.0 / h[0]
    via_alpha = moments_from_verblunsky(alphas, c0=c0)
    moments = recover_moments(h)
    cross = float(np.max(np.abs(moments - via_alpha)))
    h_back = orthonormal_sq_at_one(alphas)
    roundtrip = float(np.max(np.abs(h_back - h / h[0]) / (h / h[0])))
    positivity = check_positive_definite(moments)
    flags = []
    if cross > tol:
        flags.append(f"routes disagree: max |c_A - c_B| = {cross:.3e}")
    if roundtrip > tol:
        flags.append(f"forward map does not reproduce heights: rel err {roundtrip:.3e}")
    if not positivity.valid:
        flags.append(f"positivity {positivity.describe()}")
    return RecoveryReport(
        heights=h,
        alphas=alphas,
        moments=moments,
        moments_from_alphas=via_alpha,
        max_cross_error=cross,
        positivity=positivity,
        heights_roundtrip_error=roundtrip,
        tol=tol,
        flags=flags,
    )
