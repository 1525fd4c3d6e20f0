"""가우시안 Gram 행렬, 중앙값 휴리스틱, Gram VJP 검증."""

import math

import numpy as np
import pytest

from errors import InsufficientSamplesError, InvalidBandwidthError, NonFiniteError, ShapeError
from lsmi_estimator.kernels import (
    FALLBACK_SIGMA,
    cross_sq_dists,
    gaussian_cross_gram,
    gaussian_gram,
    gram_vjp,
    median_heuristic,
    pairwise_sq_dists,
)
from lsmi_estimator.oracles import finite_diff_grad
from tests.conftest import brute_sq_dists


class TestPairwiseSqDists:

    def test_two_points(self):
        np.testing.assert_array_equal(pairwise_sq_dists([[0.0], [2.0]]), [[0.0, 4.0], [4.0, 0.0]])

    def test_single_row(self):
        np.testing.assert_array_equal(pairwise_sq_dists([[1.5, -2.0]]), [[0.0]])

    def test_matches_double_loop(self, rng):
        X = rng.standard_normal((5, 3))
        np.testing.assert_allclose(pairwise_sq_dists(X), brute_sq_dists(X), rtol=0, atol=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteError):
            pairwise_sq_dists([[0.0], [np.nan]])

    def test_cross_dists_match_pairwise_on_same_batch(self, rng):
        X = rng.standard_normal((6, 2))
        np.testing.assert_allclose(cross_sq_dists(X, X), pairwise_sq_dists(X), atol=1e-12)

    def test_cross_dims_must_match(self, rng):
        with pytest.raises(ShapeError):
            cross_sq_dists(rng.standard_normal((3, 2)), rng.standard_normal((4, 3)))


class TestGaussianGram:

    def test_two_points(self):
        e2 = math.exp(-2.0)
        np.testing.assert_allclose(gaussian_gram([[0.0], [2.0]], 1.0), [[1.0, e2], [e2, 1.0]], atol=1e-15)

    def test_identical_rows_give_ones(self):
        np.testing.assert_array_equal(gaussian_gram([[0.3, 0.1], [0.3, 0.1]], 0.2), np.ones((2, 2)))

    def test_matches_composition(self, rng):
        X = rng.standard_normal((6, 2))
        expected = np.exp(-brute_sq_dists(X) / (2.0 * 0.7**2))
        np.testing.assert_allclose(gaussian_gram(X, 0.7), expected, rtol=0, atol=1e-12)

    def test_symmetric_unit_diagonal_in_unit_interval(self, rng):
        K = gaussian_gram(rng.standard_normal((20, 4)), 1.3)
        np.testing.assert_array_equal(K, K.T)
        np.testing.assert_array_equal(np.diag(K), 1.0)
        assert np.all(K > 0.0) and np.all(K <= 1.0)
        assert np.linalg.eigvalsh(K).min() >= -1e-8

    def test_scale_invariance(self, rng):
        X = rng.standard_normal((8, 3))
        np.testing.assert_allclose(gaussian_gram(3.5 * X, 3.5 * 0.9), gaussian_gram(X, 0.9), atol=1e-12)

    @pytest.mark.parametrize("sigma", [0.0, -1.0, np.inf, np.nan])
    def test_invalid_bandwidth(self, sigma):
        with pytest.raises(InvalidBandwidthError):
            gaussian_gram([[0.0], [1.0]], sigma)

    def test_cross_gram_diagonal_block(self, rng):
        X = rng.standard_normal((5, 2))
        np.testing.assert_allclose(gaussian_cross_gram(X, X, 0.8), gaussian_gram(X, 0.8), atol=1e-15)


class TestMedianHeuristic:

    def test_three_points(self):
        assert median_heuristic([[0.0], [1.0], [2.0]]) == 1.0

    def test_single_pair(self):
        assert median_heuristic([[0.0, 0.0], [3.0, 0.0]]) == 3.0

    def test_all_identical_falls_back(self):
        assert median_heuristic(np.ones((5, 2))) == FALLBACK_SIGMA

    def test_mostly_duplicates_uses_positive_distances(self):
        # 10개 거리 중 6개가 0 -> 중앙값 0, 양의 거리 4개는 모두 1
        X = [[0.0], [0.0], [0.0], [0.0], [1.0]]
        assert median_heuristic(X) == 1.0

    def test_needs_two_samples(self):
        with pytest.raises(InsufficientSamplesError):
            median_heuristic([[1.0]])


class TestGramVjp:

    def test_zero_upstream(self, rng):
        X = rng.standard_normal((4, 2))
        np.testing.assert_array_equal(gram_vjp(X, 1.0, np.zeros((4, 4))), np.zeros((4, 2)))

    def test_column_sums_vanish(self, rng):
        X = rng.standard_normal((7, 3))
        G = rng.standard_normal((7, 7))
        np.testing.assert_allclose(gram_vjp(X, 0.9, G).sum(axis=0), 0.0, atol=1e-12)

    def test_matches_finite_differences(self, rng):
        X = rng.standard_normal((4, 2))
        G = rng.standard_normal((4, 4))
        numeric = finite_diff_grad(lambda Z: float(np.sum(G * gaussian_gram(Z, 1.1))), X, h=1e-6)
        np.testing.assert_allclose(gram_vjp(X, 1.1, G), numeric, rtol=1e-5, atol=1e-8)

    def test_precomputed_gram_gives_same_result(self, rng):
        X = rng.standard_normal((5, 2))
        G = rng.standard_normal((5, 5))
        np.testing.assert_array_equal(gram_vjp(X, 0.6, G), gram_vjp(X, 0.6, G, gaussian_gram(X, 0.6)))

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeError):
            gram_vjp(rng.standard_normal((4, 2)), 1.0, np.zeros((3, 3)))
