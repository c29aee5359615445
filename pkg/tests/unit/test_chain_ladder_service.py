"""
Unit tests for chain-ladder estimation, reserves and the one-year revaluation.
"""
import numpy as np
import pytest

from app.models import DevFactorEstimates, ExtendedTriangle, Gamma, NextDiagonal
from app.services import chain_ladder_service, triangle_service
from app.utils.exceptions import EstimationError, ValidationError


class TestFitColumn:
    """Test fit_column"""

    def test_weighted_mean_and_variance(self):
        """Test fhat = sum(wF)/sum(w) and sigma2hat with divisor m - 1"""
        fhat, sigma2hat = chain_ladder_service.fit_column([1.5, 1.6, 1.4], [1.0, 1.0, 1.0])
        assert fhat == pytest.approx(1.5)
        assert sigma2hat == pytest.approx(0.01)

    def test_constant_ratios_give_zero_variance_exactly(self):
        """Test that identical ratios return the ratio itself and 0.0"""
        fhat, sigma2hat = chain_ladder_service.fit_column([1.1, 1.1, 1.1], [3.0, 7.0, 11.0])
        assert fhat == 1.1
        assert sigma2hat == 0.0

    def test_zero_weight_sum_is_rejected(self):
        """Test that all-zero weights raise EstimationError"""
        with pytest.raises(EstimationError):
            chain_ladder_service.fit_column([1.0, 2.0], [0.0, 0.0])


class TestEstimate:
    """Test estimate"""

    def test_unweighted_estimates(self, small_triangle):
        """Test gamma = 0 factors and variances on the hand-made triangle"""
        est = chain_ladder_service.estimate(small_triangle, 0)
        np.testing.assert_allclose(est.fhat, [1.5, 1.15, 1.0], rtol=1e-12)
        np.testing.assert_allclose(est.sigma2hat, [0.01, 0.005, 0.0], rtol=1e-9)
        assert est.gamma == Gamma.UNWEIGHTED

    def test_volume_weighted_estimates(self, small_triangle):
        """Test gamma = 1 gives the classical volume-weighted factors"""
        est = chain_ladder_service.estimate(small_triangle, 1)
        assert est.factor(1) == pytest.approx(1030.0 / 700.0, rel=1e-12)
        assert est.factor(2) == pytest.approx(532.0 / 470.0, rel=1e-12)
        assert est.factor(3) == 1.0
        assert est.variance(3) == 0.0

    def test_invalid_gamma_is_rejected(self, small_triangle):
        """Test that gamma outside {0, 1} is a validation error"""
        with pytest.raises(ValidationError):
            chain_ladder_service.estimate(small_triangle, 2)

    def test_non_positive_cell_with_volume_weights_is_rejected(self):
        """Test that gamma = 1 needs positive cells"""
        tri = triangle_service.parse_triangle('100,-50,60\n200,220\n300\n')
        with pytest.raises(EstimationError) as exc_info:
            chain_ladder_service.estimate(tri, 1)
        assert exc_info.value.payload == {'row': 0, 'column': 1}
        assert exc_info.value.exit_code == 3

    def test_zero_cell_breaks_next_column(self):
        """Test that a zero cell makes the following ratios undefined"""
        tri = triangle_service.parse_triangle('100,0,0,0\n100,50,60\n100,70\n100\n')
        with pytest.raises(EstimationError):
            chain_ladder_service.estimate(tri, 0)

    def test_last_factor_is_the_observed_ratio(self, reference_triangle):
        """Test fhat_n = C[0,n] / C[0,n-1] with zero variance for both weightings"""
        n = reference_triangle.n
        for gamma in (0, 1):
            est = chain_ladder_service.estimate(reference_triangle, gamma)
            assert est.fhat[-1] == pytest.approx(3678633.0 / 3674511.0, rel=1e-14)
            assert est.fhat[-1] == reference_triangle.cell(0, n) / reference_triangle.cell(0, n - 1)
            assert est.sigma2hat[-1] == 0.0

    def test_constant_columns_give_zero_variances(self):
        """Test the degenerate triangle with identical ratios per column"""
        tri = triangle_service.parse_triangle('100,150,180,180\n200,300,360\n400,600\n300\n')
        est = chain_ladder_service.estimate(tri, 0)
        np.testing.assert_array_equal(est.sigma2hat, [0.0, 0.0, 0.0])
        np.testing.assert_array_equal(est.fhat, [1.5, 1.2, 1.0])


class TestReserveT0:
    """Test reserve_t0"""

    def test_reserves_of_small_triangle(self, small_triangle):
        """Test per-year reserves and the total"""
        est = chain_ladder_service.estimate(small_triangle, 0)
        reserves = chain_ladder_service.reserve_t0(small_triangle, est)
        np.testing.assert_allclose(reserves.by_year, [0.0, 0.0, 84.0, 217.5], atol=1e-9)
        assert reserves.total == pytest.approx(301.5)

    def test_reference_triangle_unweighted(self, reference_triangle):
        """Test the bundled triangle reserve with gamma = 0"""
        est = chain_ladder_service.estimate(reference_triangle, 0)
        assert chain_ladder_service.reserve_t0(reference_triangle, est).total == pytest.approx(2243574, abs=1.0)

    def test_reference_triangle_volume_weighted(self, reference_triangle):
        """Test the bundled triangle reserve with gamma = 1"""
        est = chain_ladder_service.estimate(reference_triangle, 1)
        assert chain_ladder_service.reserve_t0(reference_triangle, est).total == pytest.approx(2237826, abs=1.0)

    def test_reserves_scale_with_the_triangle(self, reference_triangle):
        """Test that multiplying every cell by c multiplies the reserve by c"""
        scaled = reference_triangle.scaled(10.0)
        for gamma in (0, 1):
            base = chain_ladder_service.reserve_t0(
                reference_triangle, chain_ladder_service.estimate(reference_triangle, gamma)).total
            big = chain_ladder_service.reserve_t0(scaled, chain_ladder_service.estimate(scaled, gamma)).total
            assert big == pytest.approx(10.0 * base, rel=1e-12)

    def test_mismatched_estimates_are_rejected(self, small_triangle, reference_triangle):
        """Test that estimates of another horizon cannot be used"""
        est = chain_ladder_service.estimate(reference_triangle, 0)
        with pytest.raises(EstimationError):
            chain_ladder_service.reserve_t0(small_triangle, est)


class TestOneYearRevaluation:
    """Test reserve_t1, cdr_loss and the batch kernel"""

    def test_expected_payments_give_zero_loss(self, small_triangle):
        """Test X = 0 when the next diagonal equals the chain-ladder drift"""
        est = chain_ladder_service.estimate(small_triangle, 0)
        diag = NextDiagonal(payments=[0.0, 0.15 * 560.0, 0.5 * 300.0])
        assert chain_ladder_service.cdr_loss(small_triangle, est, diag) == pytest.approx(0.0, abs=1e-9)

    def test_drift_gives_zero_loss_on_reference_triangle(self, reference_triangle):
        """Test X = 0 for the drift payments (fhat - 1) C on the bundled triangle"""
        n = reference_triangle.n
        for gamma in (0, 1):
            est = chain_ladder_service.estimate(reference_triangle, gamma)
            latest = reference_triangle.diagonal()[1:]
            drift = (est.fhat[n - np.arange(1, n + 1)] - 1.0) * latest
            loss = chain_ladder_service.cdr_loss(reference_triangle, est, NextDiagonal(payments=drift))
            assert loss == pytest.approx(0.0, abs=1e-6)

    def test_reserve_t1_refits_factors(self, small_triangle):
        """Test R1 on a hand-computed extension"""
        # new ratios: column 3 -> 1.0, column 2 -> 644/560 = 1.15, column 1 -> 480/300 = 1.6
        diag = NextDiagonal(payments=[0.0, 84.0, 180.0])
        ext = ExtendedTriangle(base=small_triangle, diagonal=diag)
        # gamma = 0: f1 = (1.5 + 1.6 + 1.4 + 1.6) / 4 = 1.525, f2 = (1.2 + 1.1 + 1.15) / 3 = 1.15
        expected = 644.0 * (1.0 - 1.0) + 480.0 * (1.15 - 1.0)
        assert chain_ladder_service.reserve_t1(ext, 0) == pytest.approx(expected, rel=1e-12)

    def test_kernel_matches_scalar_path(self, reference_triangle):
        """Test that batched kernel losses equal cdr_loss row by row"""
        est = chain_ladder_service.estimate(reference_triangle, 1)
        kernel = chain_ladder_service.OneYearRevaluation.from_estimates(reference_triangle, est)
        rng = np.random.default_rng(11)
        payments = rng.uniform(0.0, 50_000.0, size=(5, reference_triangle.n))
        batch = kernel.cdr(payments)
        for row, value in zip(payments, batch):
            scalar = chain_ladder_service.cdr_loss(reference_triangle, est, NextDiagonal(payments=row))
            assert value == pytest.approx(scalar, rel=1e-12, abs=1e-6)

    def test_refit_keeps_observed_last_factor(self, reference_triangle):
        """Test that year 1 paying (fhat_n - 1) C leaves the last factor unchanged"""
        n = reference_triangle.n
        est = chain_ladder_service.estimate(reference_triangle, 0)
        kernel = chain_ladder_service.OneYearRevaluation(reference_triangle, 0)
        payments = np.zeros(n)
        payments[0] = (est.fhat[-1] - 1.0) * reference_triangle.cell(1, n - 1)
        refit = kernel.refit_factors(payments)
        assert refit.shape == (n,)
        assert refit[-1] == pytest.approx(est.fhat[-1], rel=1e-14)

    def test_refit_averages_new_last_ratio(self, reference_triangle):
        """Test that a zero payment of year 1 enters the last column as ratio 1.0"""
        n = reference_triangle.n
        kernel = chain_ladder_service.OneYearRevaluation(reference_triangle, 0)
        refit = kernel.refit_factors(np.zeros(n))
        observed = reference_triangle.cell(0, n) / reference_triangle.cell(0, n - 1)
        assert refit[-1] == pytest.approx((observed + 1.0) / 2.0, rel=1e-14)

    def test_non_positive_extension_with_volume_weights_is_rejected(self, small_triangle):
        """Test that gamma = 1 rejects a non-positive extended cell"""
        ext = ExtendedTriangle(base=small_triangle, diagonal=NextDiagonal(payments=[0.0, -600.0, 10.0]))
        with pytest.raises(EstimationError):
            chain_ladder_service.reserve_t1(ext, 1)


class TestDevFactorEstimates:
    """Test the estimates model"""

    def test_last_variance_must_be_zero(self):
        """Test that sigma2hat_n != 0 is rejected"""
        with pytest.raises(ValidationError):
            DevFactorEstimates(gamma=0, fhat=[1.2, 1.1], sigma2hat=[0.1, 0.01])


class TestThreeRowTriangle:
    """Hand-computed values on {100,150,150 / 120,192 / 110}"""

    @pytest.fixture
    def tri(self):
        return triangle_service.parse_triangle('100,150,150\n120,192\n110\n')

    def test_unweighted_estimates(self, tri):
        """Test fhat_1 = 1.55 from the ratios 1.5 and 1.6 and fhat_2 = 1"""
        est = chain_ladder_service.estimate(tri, 0)
        np.testing.assert_allclose(est.fhat, [1.55, 1.0], rtol=1e-12)
        np.testing.assert_allclose(est.sigma2hat, [0.005, 0.0], rtol=1e-9)

    def test_volume_weighted_estimates(self, tri):
        """Test fhat_1 = 342 / 220 and sigma2hat_1 = 6 / 11"""
        est = chain_ladder_service.estimate(tri, 1)
        assert est.factor(1) == pytest.approx(342.0 / 220.0, rel=1e-12)
        assert est.variance(1) == pytest.approx(6.0 / 11.0, rel=1e-9)

    def test_reserve_t0(self, tri):
        """Test R0 = 110 * 1.55 - 110 = 60.5"""
        est = chain_ladder_service.estimate(tri, 0)
        reserves = chain_ladder_service.reserve_t0(tri, est)
        np.testing.assert_allclose(reserves.by_year, [0.0, 0.0, 60.5], atol=1e-12)
        assert reserves.total == pytest.approx(60.5)

    def test_reserve_t1_after_second_year_payment(self, tri):
        """Test R1 = 0 and X = 55 - 60.5 when year 2 pays 55 and year 1 nothing"""
        est = chain_ladder_service.estimate(tri, 0)
        diag = NextDiagonal(payments=[0.0, 55.0])
        ext = ExtendedTriangle(base=tri, diagonal=diag)
        assert chain_ladder_service.reserve_t1(ext, 0) == pytest.approx(0.0, abs=1e-12)
        assert chain_ladder_service.cdr_loss(tri, est, diag) == pytest.approx(-5.5, abs=1e-12)

    def test_zero_diagonal(self, tri):
        """Test X = -R0 for a next diagonal without payments"""
        est = chain_ladder_service.estimate(tri, 0)
        loss = chain_ladder_service.cdr_loss(tri, est, NextDiagonal(payments=[0.0, 0.0]))
        assert loss == pytest.approx(-60.5, abs=1e-12)


class TestCdrLossScaling:
    """Test homogeneity of the one-year loss"""

    @pytest.mark.parametrize('gamma', [0, 1])
    def test_loss_scales_with_triangle_and_payments(self, reference_triangle, gamma):
        """Test X(c D, c Z) = c X(D, Z)"""
        c = 7.5
        est = chain_ladder_service.estimate(reference_triangle, gamma)
        payments = np.linspace(1_000.0, 80_000.0, reference_triangle.n)
        base = chain_ladder_service.cdr_loss(reference_triangle, est, NextDiagonal(payments=payments))

        scaled = reference_triangle.scaled(c)
        scaled_est = chain_ladder_service.estimate(scaled, gamma)
        big = chain_ladder_service.cdr_loss(scaled, scaled_est, NextDiagonal(payments=c * payments))
        assert big == pytest.approx(c * base, rel=1e-9)
        np.testing.assert_allclose(scaled_est.fhat, est.fhat, rtol=1e-12)
