"""
Unit tests for the fiducial N(0, sigma^2) example.
"""
import numpy as np
import pytest
from scipy import stats

from app.models import FiducialSetup
from app.services import fiducial_service
from app.utils.exceptions import ValidationError
from app.utils.rng import substream


class TestFiducialSetup:
    """Test the setup model"""

    def test_zero_variance_estimate_is_rejected(self):
        """Test that sigma2hat must be positive"""
        with pytest.raises(ValidationError):
            FiducialSetup(n=10, sigma2hat=0.0, alpha=0.995)

    def test_sample_size_must_be_positive(self):
        """Test that n >= 1"""
        with pytest.raises(ValidationError):
            FiducialSetup(n=0, sigma2hat=1.0, alpha=0.995)


class TestSampleSigma2Fiducial:
    """Test sample_sigma2_fiducial"""

    def test_mean_matches_inverse_chi_square(self):
        """Test E[n sigma2hat / chi2(n)] = n / (n - 2) sigma2hat for n = 10"""
        setup = FiducialSetup(n=10, sigma2hat=1.0, alpha=0.995)
        draws = fiducial_service.sample_sigma2_fiducial(setup, substream(1), size=100_000)
        se = draws.std() / np.sqrt(draws.size)
        assert abs(draws.mean() - 1.25) < 4 * se

    def test_draws_scale_with_the_estimate(self):
        """Test that c * sigma2hat multiplies every draw by c"""
        base = fiducial_service.sample_sigma2_fiducial(FiducialSetup(10, 1.0, 0.9), substream(2), size=50)
        scaled = fiducial_service.sample_sigma2_fiducial(FiducialSetup(10, 7.0, 0.9), substream(2), size=50)
        np.testing.assert_allclose(scaled, 7.0 * base, rtol=1e-12)

    def test_single_draw_is_a_positive_float(self):
        """Test size=None"""
        value = fiducial_service.sample_sigma2_fiducial(FiducialSetup(3, 2.0, 0.9), substream(3))
        assert isinstance(value, float)
        assert value > 0


class TestScrFiducial:
    """Test scr_fiducial and its analytic counterpart"""

    def test_cauchy_quartile(self):
        """Test n = 1, sigmahat = 2, alpha = 0.75 gives SCR = 2"""
        setup = FiducialSetup(n=1, sigma2hat=4.0, alpha=0.75)
        assert fiducial_service.scr_fiducial_exact(setup) == pytest.approx(2.0, rel=1e-9)

    def test_median_is_zero(self):
        """Test alpha = 0.5 gives SCR = 0 for every variant"""
        setup = FiducialSetup(n=7, sigma2hat=3.0, alpha=0.5)
        assert fiducial_service.scr_fiducial_exact(setup) == pytest.approx(0.0, abs=1e-12)
        for variant in fiducial_service.VARIANTS:
            assert fiducial_service.standardized_quantile(variant, 7, 0.5) == pytest.approx(0.0, abs=1e-9)

    def test_large_n_approaches_normal_quantile(self):
        """Test n = 10,000 at alpha = 0.995 is within 0.5% of 2.5758 sigmahat"""
        setup = FiducialSetup(n=10_000, sigma2hat=9.0, alpha=0.995)
        scr = fiducial_service.scr_fiducial_exact(setup)
        assert scr == pytest.approx(2.5758 * 3.0, rel=0.005)

    def test_monte_carlo_agrees_with_student_t(self):
        """Test the simulated SCR against sigmahat * t_n quantile"""
        setup = FiducialSetup(n=10, sigma2hat=4.0, alpha=0.95)
        scr = fiducial_service.scr_fiducial(setup, 200_000, substream(5))
        assert scr == pytest.approx(fiducial_service.scr_fiducial_exact(setup), rel=0.02)

    def test_unknown_variant_is_rejected(self):
        """Test that only fiducial, theoretical and plugin exist"""
        with pytest.raises(ValidationError):
            fiducial_service.scr_fiducial(FiducialSetup(5, 1.0, 0.9), 10, substream(0), variant='bayes')


class TestStandardizedQuantile:
    """Test standardized_quantile"""

    def test_fiducial_and_plugin_closed_forms(self):
        """Test t_n and standard normal quantiles"""
        assert fiducial_service.standardized_quantile('fiducial', 10, 0.995) == pytest.approx(stats.t.ppf(0.995, 10))
        assert fiducial_service.standardized_quantile('plugin', 10, 0.995) == pytest.approx(2.5758, abs=1e-4)

    def test_theoretical_quantile_solves_its_cdf(self):
        """Test that the numerical quantile reproduces alpha"""
        q = fiducial_service.standardized_quantile('theoretical', 10, 0.99)
        assert fiducial_service._theoretical_cdf(q, 10) == pytest.approx(0.99, abs=1e-9)

    def test_theoretical_lies_below_fiducial(self):
        """Test that the estimator law gives a smaller tail quantile than the fiducial law"""
        for n in (3, 10, 30):
            theoretical = fiducial_service.standardized_quantile('theoretical', n, 0.995)
            fiducial = fiducial_service.standardized_quantile('fiducial', n, 0.995)
            assert theoretical < fiducial

    def test_lower_tail_is_symmetric(self):
        """Test q(1 - alpha) = -q(alpha)"""
        upper = fiducial_service.standardized_quantile('theoretical', 10, 0.95)
        lower = fiducial_service.standardized_quantile('theoretical', 10, 0.05)
        assert lower == pytest.approx(-upper, rel=1e-9)


class TestCoverageExperiment:
    """Test coverage_experiment"""

    def test_analytic_coverage_close_to_alpha(self):
        """Test fiducial coverage within 4 binomial standard errors"""
        s = 20_000
        coverage = fiducial_service.coverage_experiment(1.0, 10, [0.9, 0.995], s, 0, seed=11)
        for alpha in (0.9, 0.995):
            se = np.sqrt(alpha * (1 - alpha) / s)
            assert abs(coverage['fiducial'][alpha] - alpha) < 4 * se

    def test_theoretical_and_plugin_cover_less(self):
        """Test that smaller quantiles on the same data never cover more"""
        coverage = fiducial_service.coverage_experiment(1.0, 10, [0.995], 20_000, 0, seed=12)
        assert coverage['theoretical'][0.995] < coverage['fiducial'][0.995]
        assert coverage['plugin'][0.995] < coverage['fiducial'][0.995]

    def test_coverage_does_not_depend_on_scale(self):
        """Test sigma_true = 1 and sigma_true = 100 with the same seed"""
        small = fiducial_service.coverage_experiment(1.0, 10, [0.9, 0.99], 5_000, 0, seed=13)
        large = fiducial_service.coverage_experiment(100.0, 10, [0.9, 0.99], 5_000, 0, seed=13)
        for variant in fiducial_service.VARIANTS:
            for alpha in (0.9, 0.99):
                assert small[variant][alpha] == pytest.approx(large[variant][alpha], abs=2 / 5_000)

    def test_monte_carlo_mode_returns_frequencies(self):
        """Test t > 0 with a restricted variant list"""
        coverage = fiducial_service.coverage_experiment(2.0, 5, [0.5, 0.9], 200, 200, seed=14,
                                                        variants=['fiducial'])
        assert list(coverage) == ['fiducial']
        assert 0.0 <= coverage['fiducial'][0.5] <= coverage['fiducial'][0.9] <= 1.0

    def test_invalid_inputs_are_rejected(self):
        """Test sigma_true <= 0 and s < 1"""
        with pytest.raises(ValidationError):
            fiducial_service.coverage_experiment(0.0, 10, [0.9], 100, 0, seed=1)
        with pytest.raises(ValidationError):
            fiducial_service.coverage_experiment(1.0, 10, [0.9], 0, 0, seed=1)


class TestDensityAB:
    """Test density_AB"""

    def test_change_of_variables_identity(self):
        """Test density_B(x) = density_A(1/x) / x^2"""
        x = np.array([0.05, 0.3, 1.0, 2.5, 9.0, 40.0])
        for n in (1, 4, 10):
            _, density_b = fiducial_service.density_AB(x, n)
            density_a_inv, _ = fiducial_service.density_AB(1.0 / x, n)
            np.testing.assert_allclose(density_b, density_a_inv / x ** 2, rtol=1e-12)

    def test_fiducial_law_has_the_heavier_tail(self):
        """Test that density_B / density_A grows without bound in the tail for n = 10"""
        a5, b5 = fiducial_service.density_AB(5.0, 10)
        a100, b100 = fiducial_service.density_AB(100.0, 10)
        assert b100 / a100 > b5 / a5
        assert b100 / a100 > 1.0

    def test_densities_are_positive(self):
        """Test positivity on x > 0"""
        a, b = fiducial_service.density_AB(np.linspace(0.01, 30.0, 50), 10)
        assert np.all(a > 0) and np.all(b > 0)

    def test_non_positive_x_is_rejected(self):
        """Test that x <= 0 raises ValidationError"""
        for x in (0.0, -1.0):
            with pytest.raises(ValidationError):
                fiducial_service.density_AB(x, 10)

    def test_density_grid_columns(self):
        """Test the plotting grid layout"""
        grid = fiducial_service.density_grid(10, upper=30.0, points=60)
        assert grid.shape == (60, 3)
        assert grid[0, 0] == pytest.approx(0.5)
        assert grid[-1, 0] == pytest.approx(30.0)
