import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canonspec.errors import InsufficientMoments, NotPositiveDefinite, Singular
from canonspec.toeplitz import (
    ORACLE_MAX_SIZE,
    bordered_det,
    brute_det,
    brute_inverse,
    build_toeplitz,
    check_positive_definite,
    det_step,
    initial_state,
    trench_update,
)
from conftest import random_measure_moments, random_valid_moments


def grow(c, n):
    state = initial_state()
    for k in range(1, n + 1):
        state = trench_update(state, c[1 : k + 1])
    return state


def test_build_toeplitz_examples():
    assert build_toeplitz([1.0], 0).tolist() == [[1.0]]
    expected = [[1, -0.5, 0], [-0.5, 1, -0.5], [0, -0.5, 1]]
    np.testing.assert_array_equal(build_toeplitz([1, -0.5, 0], 2), expected)
    np.testing.assert_array_equal(build_toeplitz([1, 0.5], 1), [[1, 0.5], [0.5, 1]])


def test_build_toeplitz_needs_enough_moments():
    with pytest.raises(InsufficientMoments):
        build_toeplitz([1.0, 0.2], 2)


def test_det_step_examples():
    s0 = initial_state()
    assert det_step(s0, 1.0, [0.5]) == pytest.approx(0.75)
    s1 = trench_update(s0, np.array([-0.5]))
    assert det_step(s1, 1.0, [0.0, -0.5]) == pytest.approx(0.5)
    assert brute_det(build_toeplitz([1, -0.5, 0], 2)) == pytest.approx(0.5)


def test_bordered_det_examples():
    s0 = initial_state()
    assert bordered_det(s0, [0.5]) == pytest.approx(0.5)
    assert bordered_det(s0, [0.5]) == pytest.approx(brute_det(np.array([[1, 0.5], [1, 1]])))
    s1 = trench_update(s0, np.array([-0.5]))
    v = np.array([0.0, -0.5])
    dense = np.block([[s1.matrix, v[:, None]], [np.ones((1, 2)), np.ones((1, 1))]])
    assert bordered_det(s1, v) == pytest.approx(brute_det(dense))
    assert bordered_det(s1, np.zeros(2)) == pytest.approx(s1.det)


def test_trench_small_cases():
    s1 = trench_update(initial_state(), np.array([0.5]))
    assert s1.delta == pytest.approx(0.75)
    np.testing.assert_allclose(s1.inv, [[4 / 3, -2 / 3], [-2 / 3, 4 / 3]], atol=1e-15)
    s2 = grow(np.array([1, -0.5, 0]), 2)
    np.testing.assert_allclose(build_toeplitz([1, -0.5, 0], 2) @ s2.inv, np.eye(3), atol=1e-12)


def test_trench_rejects_degenerate():
    with pytest.raises(NotPositiveDefinite) as exc:
        trench_update(initial_state(), np.array([1.0]))
    assert exc.value.order == 1


def test_trench_random_against_oracles(rng):
    for _ in range(30):
        n = int(rng.integers(1, 11))
        c = random_measure_moments(rng, n)
        state = initial_state()
        for k in range(1, n + 1):
            j = build_toeplitz(c, k)
            d = det_step(state, 1.0, c[k:0:-1])
            assert abs(d - brute_det(j)) <= 1e-10 * abs(brute_det(j))
            state = trench_update(state, c[1 : k + 1])
            assert abs(state.det - brute_det(j)) <= 1e-10 * brute_det(j)
        assert np.max(np.abs(state.inv - brute_inverse(build_toeplitz(c, n)))) <= 1e-10


def test_trench_ill_conditioned_relative(rng):
    # alphas near +-0.9 give inverse entries up to ~1e4; compare relatively
    for _ in range(30):
        n = int(rng.integers(1, 11))
        c = random_valid_moments(rng, n)
        state = grow(c, n)
        ref = brute_inverse(build_toeplitz(c, n))
        scale = np.abs(ref).max()
        assert np.max(np.abs(state.inv - ref)) <= 1e-13 * scale**2


def test_reversal_symmetry(rng):
    c = random_valid_moments(rng, 8)
    state = grow(c, 7)
    u = c[1:9]
    v = u[::-1]
    assert v @ state.inv @ v == pytest.approx(u @ state.inv @ u, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-0.95, 0.95), min_size=1, max_size=10))
def test_persymmetry_property(alphas):
    from canonspec.opuc import moments_from_verblunsky

    c = moments_from_verblunsky(alphas)
    inv = grow(c, len(alphas)).inv
    # the blockwise update is exactly symmetric; persymmetry holds up to
    # rounding amplified by the condition number (about max |inv|)
    scale = max(1.0, np.abs(inv).max())
    assert np.max(np.abs(inv - inv.T)) <= 1e-10 * scale
    assert np.max(np.abs(inv - inv[::-1, ::-1].T)) <= 1e-13 * scale**2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_persymmetry_absolute_well_conditioned(seed, n):
    c = random_measure_moments(np.random.default_rng(seed), n)
    inv = grow(c / c[0], n).inv
    assert np.max(np.abs(inv - inv[::-1, ::-1].T)) <= 1e-10


def test_check_positive_definite_examples():
    assert check_positive_definite([1, -0.5, 0, 0]).valid
    p = check_positive_definite([1, 1])
    assert not p.valid and p.failed_at == 1
    assert check_positive_definite([1, 2]).failed_at == 1
    assert check_positive_definite([2.0, 1.0]).valid
    assert "valid through 3" == check_positive_definite([1, -0.5, 0, 0]).describe()


def test_brute_oracles():
    assert brute_det(np.eye(4)) == 1.0
    np.testing.assert_array_equal(brute_inverse(np.eye(3)), np.eye(3))
    a = np.array([[1, 0.5], [0.5, 1]])
    assert brute_det(a) == pytest.approx(0.75)
    np.testing.assert_allclose(brute_inverse(a), [[4 / 3, -2 / 3], [-2 / 3, 4 / 3]])


def test_brute_oracles_random_spd(rng):
    b = rng.normal(size=(5, 5))
    a = b @ b.T + 5 * np.eye(5)
    np.testing.assert_allclose(brute_inverse(a) @ a, np.eye(5), atol=1e-11)


def test_brute_oracle_limits():
    with pytest.raises(Singular):
        brute_det(np.ones((3, 3)))
    with pytest.raises(ValueError):
        brute_det(np.eye(ORACLE_MAX_SIZE + 1))
