import math

import numpy as np
import pytest
from scipy import stats

from levy_homogenize.limit_law import (LevyTriplet, exponent, h_squared_nu,
                                       h_truncation, sample_limit,
                                       stable_integral, triplet_report)


class TestStableIntegral:
    def test_cauchy_value(self):
        # alpha = 1: the compensated integral is exactly -pi |u|
        assert stable_integral(1.0, 1.0) == pytest.approx(-math.pi, abs=1e-6)
        assert stable_integral(1.0, 2.5) == pytest.approx(-2.5 * math.pi,
                                                          abs=1e-6)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_homogeneity(self, alpha):
        base = stable_integral(alpha, 1.0)
        for u in (0.3, 1.7, 4.0):
            assert stable_integral(alpha, u) == pytest.approx(
                base * u ** alpha, rel=1e-10)

    def test_vectorized_and_even(self):
        u = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
        v = stable_integral(1.3, u)
        assert v.shape == u.shape
        assert np.allclose(v, v[::-1])
        assert v[2] == 0.0

    def test_nonpositive_everywhere(self):
        for alpha in (0.2, 0.8, 1.4, 1.9):
            assert np.all(stable_integral(alpha, np.linspace(0, 5, 11)) <= 0)

    def test_bad_alpha_rejected(self):
        for alpha in (0.0, 2.0, -1.0):
            with pytest.raises(ValueError):
                stable_integral(alpha, 1.0)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5, 1.8])
    def test_closed_form(self, alpha):
        # the quadrature must reproduce -pi / (Gamma(1+alpha) sin(pi alpha/2))
        from scipy.special import gamma
        closed = -math.pi / (gamma(1.0 + alpha)
                             * math.sin(0.5 * math.pi * alpha))
        assert stable_integral(alpha, 1.0) == pytest.approx(closed, abs=1e-8)


class TestTriplet:
    def test_invalid_fields(self):
        with pytest.raises(ValueError):
            LevyTriplet(A=-1.0, theta_bar=1.0, alpha=1.0)
        with pytest.raises(ValueError):
            LevyTriplet(A=1.0, theta_bar=-0.1, alpha=1.0)
        with pytest.raises(ValueError):
            LevyTriplet(A=1.0, theta_bar=1.0, alpha=2.0)

    def test_frozen(self):
        t = LevyTriplet(A=1.0, theta_bar=0.0, alpha=1.0)
        with pytest.raises(Exception):
            t.A = 2.0

    def test_exponent_pure_gaussian(self):
        t = LevyTriplet(A=2.0, theta_bar=0.0, alpha=1.0)
        assert exponent(t, 1.0) == pytest.approx(-1.0)
        u = np.linspace(-3, 3, 13)
        assert np.allclose(exponent(t, u), -u * u)

    def test_exponent_monotone_decay(self):
        t = LevyTriplet(A=0.5, theta_bar=0.7, alpha=1.2)
        u = np.linspace(0.0, 4.0, 41)
        phi = exponent(t, u)
        assert phi[0] == 0.0
        assert np.all(np.diff(phi) < 0)


class TestSampler:
    def test_gaussian_marginal(self):
        t = LevyTriplet(A=1.7, theta_bar=0.0, alpha=1.0)
        x = sample_limit(t, t=2.0, n=20000, seed=5)
        ks = stats.kstest(x, "norm", args=(0.0, math.sqrt(1.7 * 2.0)))
        assert ks.pvalue > 0.01

    def test_cauchy_marginal(self):
        # A = 0, alpha = 1: scaled Cauchy with scale t theta_bar sigma_1
        t = LevyTriplet(A=0.0, theta_bar=1.0, alpha=1.0)
        x = sample_limit(t, t=1.0, n=20000, seed=6)
        ks = stats.kstest(x, "cauchy", args=(0.0, math.pi))
        assert ks.pvalue > 0.01

    @pytest.mark.parametrize("alpha", [0.7, 1.0, 1.6])
    def test_ecf_matches_exponent(self, alpha):
        trip = LevyTriplet(A=0.4, theta_bar=0.8, alpha=alpha)
        n = 200000
        x = sample_limit(trip, t=0.5, n=n, seed=7)
        u = np.linspace(-2.0, 2.0, 17)
        ecf = np.exp(1j * np.outer(u, x)).mean(axis=1)
        theory = np.exp(0.5 * np.asarray(exponent(trip, u)))
        se = np.sqrt((1.0 - np.abs(ecf) ** 2) / n)
        z = np.abs(ecf - theory) / np.maximum(se, 1e-12)
        assert np.max(z) < 4.5

    def test_deterministic_in_seed(self):
        t = LevyTriplet(A=1.0, theta_bar=1.0, alpha=1.3)
        a = sample_limit(t, 1.0, 100, seed=3)
        b = sample_limit(t, 1.0, 100, seed=3)
        c = sample_limit(t, 1.0, 100, seed=4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_bad_n_rejected(self):
        t = LevyTriplet(A=1.0, theta_bar=0.0, alpha=1.0)
        with pytest.raises(ValueError):
            sample_limit(t, 1.0, 0, seed=1)


class TestCharacteristics:
    def test_truncation_clips(self):
        z = np.array([-3.0, -0.5, 0.0, 0.5, 3.0])
        assert np.allclose(h_truncation(z), [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_h_squared_nu_oracles(self):
        assert h_squared_nu(1.0) == pytest.approx(4.0, rel=1e-9)
        assert h_squared_nu(1.5) == pytest.approx(16.0 / 3.0, rel=1e-9)

    def test_report_pure_diffusion(self):
        rep = triplet_report(LevyTriplet(A=2.0, theta_bar=0.0, alpha=1.0),
                             t=3.0)
        assert rep["drift_h"] == 0.0
        assert rep["gaussian_variance"] == pytest.approx(6.0)
        assert rep["compensator_slope"] == pytest.approx(2.0)

    def test_report_slope_combines_parts(self):
        rep = triplet_report(LevyTriplet(A=1.0, theta_bar=0.5, alpha=1.0),
                             t=1.0)
        assert rep["compensator_slope"] == pytest.approx(1.0 + 0.5 * 4.0)
