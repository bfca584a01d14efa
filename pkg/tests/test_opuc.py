import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canonspec.errors import InvalidVerblunsky, NotPositiveDefinite
from canonspec.measure import geronimus_measure, quadrature_moments
from canonspec.opuc import (
    MonicPair,
    heine_monic_oracle,
    monic_norm_sq,
    monic_pairs,
    moments_from_verblunsky,
    orthonormal_sq_at_one,
    reverse,
    schur_moments,
    szego_step,
    verblunsky_from_moments,
)
from canonspec.toeplitz import brute_det, build_toeplitz
from conftest import random_valid_moments

ALPHAS_1COS = [-1 / 2, -1 / 3, -1 / 4, -1 / 5]


def test_szego_first_step():
    pair = szego_step(MonicPair.one(), -0.5)
    np.testing.assert_array_equal(pair.phi, [0.5, 1.0])
    np.testing.assert_array_equal(pair.phi_star, [1.0, 0.5])


def test_szego_zero_alpha_shifts():
    pair = MonicPair(np.array([0.3, 1.0]), np.array([1.0, 0.3]))
    np.testing.assert_array_equal(szego_step(pair, 0.0).phi, [0.0, 0.3, 1.0])


def test_szego_rejects_bad_alpha():
    with pytest.raises(InvalidVerblunsky):
        szego_step(MonicPair.one(), 1.0)
    with pytest.raises(InvalidVerblunsky):
        list(monic_pairs([0.1, np.nan]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-0.99, 0.99), min_size=1, max_size=15))
def test_reverse_involution_and_value_at_one(alphas):
    for pair in monic_pairs(alphas):
        np.testing.assert_array_equal(reverse(reverse(pair.phi)), pair.phi)
        np.testing.assert_allclose(pair.phi_star, reverse(pair.phi), atol=1e-12)
        assert pair.phi.sum() == pytest.approx(pair.phi_star.sum(), abs=1e-12)
        assert pair.phi[-1] == 1.0


def test_monic_norm_sq():
    assert monic_norm_sq([0.0, 0.0]) == 1.0
    assert monic_norm_sq([-0.5, -1 / 3]) == pytest.approx(2 / 3)
    assert monic_norm_sq([0.4] * 7) == pytest.approx(0.84**7)
    c = moments_from_verblunsky([-0.5, -1 / 3])
    ratio = brute_det(build_toeplitz(c, 2)) / brute_det(build_toeplitz(c, 1))
    assert ratio == pytest.approx(2 / 3)


def test_orthonormal_sq_at_one():
    np.testing.assert_allclose(orthonormal_sq_at_one(ALPHAS_1COS), [1, 3, 6, 10, 15], rtol=1e-14)
    np.testing.assert_array_equal(orthonormal_sq_at_one([0.0] * 3), np.ones(4))
    a = 0.5
    alpha = (1 - a) / (1 + a)
    np.testing.assert_allclose(orthonormal_sq_at_one([alpha] * 6), a ** np.arange(7), rtol=1e-14)


def test_moments_from_verblunsky_examples():
    np.testing.assert_allclose(moments_from_verblunsky(ALPHAS_1COS[:3]), [1, -0.5, 0, 0], atol=1e-15)
    np.testing.assert_array_equal(moments_from_verblunsky([0.0] * 4, c0=2.5), [2.5, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        moments_from_verblunsky([0.1], c0=0.0)


def test_moments_from_constant_alpha_match_quadrature():
    a = 2.0
    alpha = (1 - a) / (1 + a)
    c = moments_from_verblunsky([alpha] * 8)
    q = quadrature_moments(geronimus_measure(alpha), 8)
    assert np.max(np.abs(c - q)) <= 1e-6


def test_verblunsky_from_moments_examples():
    np.testing.assert_allclose(verblunsky_from_moments([1, -0.5, 0, 0]), ALPHAS_1COS[:3], atol=1e-15)
    np.testing.assert_array_equal(verblunsky_from_moments([1, 0, 0]), [0, 0])
    with pytest.raises(NotPositiveDefinite):
        verblunsky_from_moments([1, 1, 1])


def test_verblunsky_round_trip(rng):
    # alpha_k reacts to moment rounding with gain 1/||Phi_k||^2, so the bound
    # is 1e-10 or that gain times 1e-11 (about 5e4 ulps; 1.2e-12 worst seen)
    for _ in range(50):
        alphas = rng.uniform(-0.9, 0.9, 20)
        back = verblunsky_from_moments(moments_from_verblunsky(alphas, c0=3.0))
        norms = np.cumprod(np.concatenate(([1.0], 1.0 - alphas[:-1] ** 2)))
        assert np.all(np.abs(back - alphas) <= np.maximum(1e-10, 1e-11 / norms))


def test_verblunsky_round_trip_moderate(rng):
    for _ in range(50):
        alphas = rng.uniform(-0.5, 0.5, 20)
        back = verblunsky_from_moments(moments_from_verblunsky(alphas))
        assert np.max(np.abs(back - alphas)) <= 1e-10


def test_heine_examples():
    pair, norm = heine_monic_oracle([1, -0.5], 1)
    np.testing.assert_allclose(pair.phi, [0.5, 1.0])
    assert norm == pytest.approx(0.75)
    pair, _ = heine_monic_oracle([1, 0, 0], 2)
    np.testing.assert_allclose(pair.phi, [0, 0, 1], atol=1e-15)


def test_heine_matches_szego(rng):
    for _ in range(20):
        n = int(rng.integers(1, 9))
        alphas = rng.uniform(-0.8, 0.8, n)
        c = moments_from_verblunsky(alphas)
        pair, norm = heine_monic_oracle(c, n)
        szego = list(monic_pairs(alphas))[-1]
        assert np.max(np.abs(pair.phi - szego.phi)) <= 1e-9
        assert norm == pytest.approx(monic_norm_sq(alphas), rel=1e-9)


def test_heine_limits(rng):
    with pytest.raises(ValueError):
        heine_monic_oracle(random_valid_moments(rng, 9), 9)
    with pytest.raises(NotPositiveDefinite):
        heine_monic_oracle([1, 0.5, 1.5], 2)


def test_schur_moments_agree_with_orthogonality_route(rng):
    np.testing.assert_allclose(schur_moments(ALPHAS_1COS[:3]), [1, -0.5, 0, 0], atol=1e-15)
    for _ in range(20):
        alphas = rng.uniform(-0.9, 0.9, 20)
        assert np.max(np.abs(schur_moments(alphas, c0=2.0) - moments_from_verblunsky(alphas, c0=2.0))) <= 1e-10


def test_schur_moments_stay_accurate_at_high_order():
    alpha = -0.4
    q = quadrature_moments(geronimus_measure(alpha), 200)
    assert np.max(np.abs(schur_moments([alpha] * 200) - q)) <= 1e-10
    # the polynomial recursion amplifies rounding like prod(1 - alpha) ~ 1.4^n
    assert np.max(np.abs(moments_from_verblunsky([alpha] * 200) - q)) > 1.0
