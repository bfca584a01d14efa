import numpy as np
import pytest

from canonspec.opuc import moments_from_verblunsky

_ACCEPTANCE = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    _ACCEPTANCE.append(line)
    print(line)
    return ok


def random_valid_moments(rng, n, bound=0.9, c0=1.0):
    """Moments c_0..c_n of a random even measure (drawn through its alphas)."""
    return moments_from_verblunsky(rng.uniform(-bound, bound, n), c0=c0)


def random_measure_moments(rng, n, atoms=4):
    """Moments of a random even probability measure: Lebesgue part plus atom pairs.

    The Lebesgue weight is at least 0.05, so J_n^{-1} has entries of order 20
    at most and absolute error bounds are meaningful.
    """
    lebesgue = rng.uniform(0.05, 1.0)
    theta = rng.uniform(0.0, np.pi, atoms)
    mass = rng.dirichlet(np.ones(atoms)) * (1.0 - lebesgue)
    k = np.arange(n + 1)
    c = (mass[None, :] * np.cos(np.outer(k, theta))).sum(axis=1)
    c[0] += lebesgue
    return c


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
