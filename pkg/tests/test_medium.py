import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from levy_homogenize.medium import (MediumSpec, average,
                                    cosine_profile_log_coeffs, make_medium,
                                    pi_phase_sampler, realization,
                                    validate_assumptions)
from levy_homogenize import rng


def small_specs():
    coeff = st.floats(-0.4, 0.4)
    harm = st.tuples(st.integers(1, 3), coeff, coeff)
    return st.builds(
        MediumSpec,
        period=st.floats(0.5, 2.0),
        fourier_V=st.lists(harm, max_size=2).map(tuple),
        fourier_loga=st.lists(harm, max_size=2).map(tuple),
    )


class TestNormalization:
    def test_pi_is_probability(self, hetero_medium):
        # after the constant shift of V, the mu-average of e^{-2V} is 1
        val = average(hetero_medium, lambda F: np.exp(-2.0 * F.V))
        assert abs(val - 1.0) < 1e-12

    def test_kappa_oracle_bessel(self):
        # V = v cos(2 pi x): mean of e^{-2V} is the modified Bessel I_0(2v),
        # so the normalizing constant is half its log
        v = 0.3
        m = realization(MediumSpec(period=1.0, fourier_V=((1, v, 0.0),)), 0.0)
        assert abs(m.kappa - 0.5 * np.log(special.iv(0, 2.0 * v))) < 1e-12

    def test_flat_medium_trivial(self, flat_medium):
        f = flat_medium.eval_fields(np.linspace(0, 1, 7))
        assert np.all(f.V == 0.0)
        assert np.all(f.a == 1.0)
        assert np.all(f.b == 0.0)


class TestAverages:
    def test_mu_average_bessel_oracle(self):
        # a = e^{g cos(2 pi x)}: its mu-average is I_0(g)
        g = 0.25
        m = realization(MediumSpec(period=1.0, fourier_loga=((1, g, 0.0),)), 0.0)
        assert abs(average(m, lambda F: F.a) - special.iv(0, g)) < 1e-10

    def test_pi_mean_of_drift_vanishes(self, hetero_medium):
        assert abs(average(hetero_medium, lambda F: F.b, measure="pi")) < 1e-10

    def test_pi_vs_mu_weighting(self, hetero_medium):
        mu = average(hetero_medium, lambda F: F.a)
        pi = average(hetero_medium, lambda F: F.a, measure="pi")
        assert mu != pytest.approx(pi, rel=1e-3)


class TestFields:
    def test_drift_identity(self, hetero_medium):
        # b = (1/2) a' - a V' equals the divergence form
        # (e^{2V}/2)(e^{-2V} a)' ; check against a finite difference
        x = np.linspace(0.0, 1.0, 301)
        f = hetero_medium.eval_fields(x)
        h = 1e-6
        fp = hetero_medium.eval_fields(x + h)
        fm = hetero_medium.eval_fields(x - h)
        flux_d = (np.exp(-2 * fp.V) * fp.a - np.exp(-2 * fm.V) * fm.a) / (2 * h)
        b_fd = 0.5 * np.exp(2 * f.V) * flux_d
        assert np.max(np.abs(f.b - b_fd)) < 1e-5

    def test_stationarity_shift(self, hetero_medium):
        y = 0.123
        shifted = hetero_medium.shifted(y)
        x = np.linspace(0, 1, 11)
        assert np.allclose(shifted.eval_fields(x).a,
                           hetero_medium.eval_fields(x + y).a, atol=1e-14)

    def test_periodicity(self, hetero_medium):
        x = np.linspace(0, 1, 11)
        L = hetero_medium.spec.period
        assert np.allclose(hetero_medium.eval_fields(x).V,
                           hetero_medium.eval_fields(x + 3 * L).V, atol=1e-12)

    def test_ellipticity_bound(self, hetero_medium):
        M = hetero_medium.spec.ellipticity_bound
        a = hetero_medium.eval_fields(np.linspace(0, 1, 2001)).a
        assert np.all(a <= M + 1e-12)
        assert np.all(a >= 1.0 / M - 1e-12)


class TestCosineProfile:
    def test_exact_profile(self):
        spec = MediumSpec(period=1.0,
                          fourier_loga=cosine_profile_log_coeffs(0.5))
        m = realization(spec, 0.0)
        x = np.linspace(0, 1, 2001)
        target = 1.0 + 0.5 * np.cos(2 * np.pi * x)
        assert np.max(np.abs(m.eval_fields(x).a - target)) < 1e-12

    def test_zero_amplitude(self):
        assert cosine_profile_log_coeffs(0.0) == ()

    def test_amplitude_range(self):
        with pytest.raises(ValueError):
            cosine_profile_log_coeffs(1.0)


class TestSampling:
    def test_phase_reproducible(self, hetero_spec):
        m1 = make_medium(hetero_spec, seed=5)
        m2 = make_medium(hetero_spec, seed=5)
        assert m1.phase == m2.phase
        assert make_medium(hetero_spec, seed=6).phase != m1.phase

    def test_pi_sampler_matches_density(self, hetero_medium):
        sampler = pi_phase_sampler(hetero_medium)
        gen = rng.substream(3, rng.MISC, 1)
        xs = np.array([sampler(gen) for _ in range(20000)])
        # compare histogram with the density e^{-2V} of the profile
        bins = np.linspace(0, 1, 21)
        hist, _ = np.histogram(xs, bins=bins, density=True)
        mids = 0.5 * (bins[1:] + bins[:-1])
        ref = realization(hetero_medium.spec, 0.0)
        dens = np.exp(-2.0 * ref.eval_fields(mids).V)
        dens /= np.mean(dens)
        assert np.max(np.abs(hist - dens)) < 0.12


class TestValidation:
    def test_report_passes(self, hetero_medium):
        rep = validate_assumptions(hetero_medium)
        assert rep.all_passed
        names = {e.name for e in rep.entries}
        assert "ellipticity_a" in names
        assert "pi_normalization" in names


@settings(max_examples=25, deadline=None)
@given(spec=small_specs())
def test_invariants_random_media(spec):
    m = realization(spec, 0.4)
    assert abs(average(m, lambda F: np.exp(-2.0 * F.V)) - 1.0) < 1e-10
    assert abs(average(m, lambda F: F.b, measure="pi")) < 1e-8
    M = spec.ellipticity_bound
    a = m.eval_fields(np.linspace(0, spec.period, 101)).a
    assert np.all((a >= 1 / M - 1e-12) & (a <= M + 1e-12))
