"""참값 측도(이산 SMI, 가우시안 SMI/MI)와 KSG/KDE 기준선, 유한차분 오라클."""

import math

import numpy as np
import pytest

from data_generator.synthetic import gen_gaussian_pair
from errors import (
    DegenerateMarginalError,
    InvalidBandwidthError,
    InvalidPmfError,
    NonFiniteError,
    ShapeError,
)
from lsmi_estimator.oracles import (
    check_pmf,
    discrete_smi,
    finite_diff_grad,
    gaussian_mi,
    gaussian_mi_quadrature,
    gaussian_smi,
    gaussian_smi_quadrature,
    kde_mi,
    ksg_mi,
    max_relative_error,
    silverman_bandwidth,
)


class TestDiscreteSmi:

    def test_product_pmf_is_zero(self):
        pmf = np.outer([0.2, 0.3, 0.5], [0.6, 0.4])
        assert discrete_smi(pmf) == pytest.approx(0.0, abs=1e-14)

    def test_perfect_coupling(self):
        assert discrete_smi(np.diag([0.5, 0.5])) == 0.5

    def test_matches_loop(self, rng):
        pmf = rng.uniform(0.1, 1.0, (3, 3))
        pmf /= pmf.sum()
        pmf[-1, -1] += 1.0 - pmf.sum()
        px = pmf.sum(axis=1)
        py = pmf.sum(axis=0)
        total = 0.0
        for x in range(3):
            for y in range(3):
                q = px[x] * py[y]
                total += q * (pmf[x, y] / q - 1.0) ** 2
        assert discrete_smi(pmf) == pytest.approx(0.5 * total, abs=1e-14)
        assert discrete_smi(pmf) >= 0.0

    def test_zero_marginal(self):
        with pytest.raises(DegenerateMarginalError):
            discrete_smi([[0.5, 0.0], [0.5, 0.0]])

    @pytest.mark.parametrize("pmf", [[[0.5, 0.6], [0.0, -0.1]], [[0.3, 0.3], [0.3, 0.3]], [0.5, 0.5]])
    def test_invalid_pmf(self, pmf):
        with pytest.raises(InvalidPmfError):
            check_pmf(pmf)


class TestGaussianClosedForms:

    @pytest.mark.parametrize("rho, expected", [(0.0, 0.0), (0.5, 1.0 / 6.0), (0.8, 0.8 / 0.9)])
    def test_smi_values(self, rho, expected):
        assert gaussian_smi(rho) == pytest.approx(expected, abs=1e-12)

    def test_smi_confirmed_by_quadrature(self):
        assert gaussian_smi_quadrature(0.5) == pytest.approx(gaussian_smi(0.5), abs=1e-3)
        # 강한 상관에서는 피적분함수가 대각선으로 넓게 퍼져 적분 구간을 넓힌다
        assert gaussian_smi_quadrature(0.8, limit=12.0, points=1601) == pytest.approx(gaussian_smi(0.8), abs=1e-3)

    def test_mi_values(self):
        assert gaussian_mi(0.0) == 0.0
        assert gaussian_mi(0.8) == pytest.approx(0.5108256, abs=1e-6)
        assert gaussian_mi(-0.6) == gaussian_mi(0.6)

    def test_mi_confirmed_by_quadrature(self):
        assert gaussian_mi_quadrature(0.8) == pytest.approx(gaussian_mi(0.8), abs=1e-3)

    def test_smi_increasing_in_abs_rho(self):
        values = [gaussian_smi(r) for r in (0.0, 0.3, 0.6, 0.9)]
        assert all(a < b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
    def test_rho_out_of_range(self, rho):
        with pytest.raises(ValueError):
            gaussian_smi(rho)
        with pytest.raises(ValueError):
            gaussian_mi(rho)


class TestKsg:

    def test_correlated_gaussian_near_truth(self):
        values = [ksg_mi(*gen_gaussian_pair(1000, 0.8, seed), k=5).value for seed in range(3)]
        assert np.mean(values) == pytest.approx(gaussian_mi(0.8), abs=0.07)

    def test_common_scaling_is_exact(self):
        X, Y = gen_gaussian_pair(300, 0.5, seed=4)
        assert ksg_mi(2.0 * X, 2.0 * Y).value == ksg_mi(X, Y).value

    def test_translation(self):
        X, Y = gen_gaussian_pair(300, 0.5, seed=5)
        assert ksg_mi(X + 3.0, Y).value == pytest.approx(ksg_mi(X, Y).value, abs=1e-9)

    def test_duplicates_are_jittered_deterministically(self):
        X = np.repeat(np.arange(50, dtype=np.float64), 4)[:, None]
        Y = X + 0.0
        first = ksg_mi(X, Y, k=3, seed=1).value
        assert np.isfinite(first)
        assert ksg_mi(X, Y, k=3, seed=1).value == first

    def test_increasing_in_rho(self):
        values = [ksg_mi(*gen_gaussian_pair(800, rho, 0)).value for rho in (0.0, 0.5, 0.9)]
        assert all(a < b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("k", [0, 10])
    def test_k_range(self, k):
        X, Y = gen_gaussian_pair(10, 0.0, seed=0)
        with pytest.raises(ValueError):
            ksg_mi(X, Y, k=k)


class TestKde:

    def test_constant_y_gives_zero(self):
        X, _ = gen_gaussian_pair(500, 0.0, seed=0)
        Y = np.full_like(X, 2.5)
        est = kde_mi(X, Y, silverman_bandwidth(X), silverman_bandwidth(Y))
        assert est.value == pytest.approx(0.0, abs=1e-12)
        assert est.method == "kde"

    def test_dependence_detected(self):
        X0, Y0 = gen_gaussian_pair(500, 0.0, seed=3)
        X1, Y1 = gen_gaussian_pair(500, 0.8, seed=3)
        low = kde_mi(X0, Y0, silverman_bandwidth(X0), silverman_bandwidth(Y0)).value
        high = kde_mi(X1, Y1, silverman_bandwidth(X1), silverman_bandwidth(Y1)).value
        assert 0.2 < high and low < high

    def test_silverman_constant_falls_back(self):
        assert silverman_bandwidth(np.ones(10)) == 1.0

    def test_invalid_bandwidth(self):
        X, Y = gen_gaussian_pair(20, 0.0, seed=0)
        with pytest.raises(InvalidBandwidthError):
            kde_mi(X, Y, 0.0, 1.0)

    def test_multivariate_rejected(self, rng):
        with pytest.raises(ShapeError):
            kde_mi(rng.standard_normal((20, 2)), rng.standard_normal((20, 1)), 1.0, 1.0)


class TestFiniteDiff:

    def test_quadratic(self, rng):
        X0 = rng.standard_normal((4, 3))
        grad = finite_diff_grad(lambda X: float(np.sum(X**2)), X0, h=1e-5)
        np.testing.assert_allclose(grad, 2.0 * X0, rtol=1e-8, atol=1e-9)

    def test_constant(self, rng):
        np.testing.assert_array_equal(finite_diff_grad(lambda X: 3.0, rng.standard_normal((2, 2))), 0.0)

    def test_input_not_mutated(self, rng):
        X0 = rng.standard_normal((3, 2))
        before = X0.copy()
        finite_diff_grad(lambda X: float(X.sum()), X0)
        np.testing.assert_array_equal(X0, before)

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteError):
            finite_diff_grad(lambda X: math.nan, np.zeros((2, 1)))

    def test_max_relative_error_floor(self):
        assert max_relative_error([1.0, 1e-12], [1.0001, 2e-12]) == pytest.approx(1e-4 / 1.0001)
        assert max_relative_error([0.0], [1e-10]) == 0.0
