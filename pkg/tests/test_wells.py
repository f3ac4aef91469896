"""Well-potential operations against closed forms.

Quartic oracles used below (gamma = b - a, amplitude m):
  sigma = sqrt(2 m) gamma^3 / 6, sigma_n = sigma / gamma,
  d_n(v) = sqrt(2 m) gamma^2 (v^2/2 - v^3/3),
  profile = logistic with rate sqrt(2 m) gamma.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from wmcflab import wells
from wmcflab.errors import DomainError
from wmcflab.quadrature import adaptive_gauss_legendre

SQRT2_6 = 0.23570226039551587  # sqrt(2)/6


def moving_spec(**kw):
    """a = -x0^2, b = 1: the gamma(0.3) = 1.09 example geometry."""
    return wells.canonical_quartic(
        a=lambda x: -x[..., 0] ** 2,
        grad_a=lambda x: np.stack([-2.0 * x[..., 0]]
                                  + [np.zeros(np.shape(x)[:-1])] * (np.shape(x)[-1] - 1),
                                  axis=-1),
        b=lambda x: np.ones(np.shape(x)[:-1]),
        grad_b=lambda x: np.zeros(np.shape(x)),
        delta_sep=1.0, **kw)


class TestGamma:
    def test_constant_wells(self):
        spec = wells.constant_quartic()
        assert wells.gamma(spec, 0.37) == pytest.approx(1.0, abs=1e-15)

    def test_linear_upper_well(self):
        spec = wells.linear_wells_quartic(0.0, 0.0, 1.0, 0.2, delta_sep=1.0)
        assert wells.gamma(spec, 0.5) == pytest.approx(1.1, abs=1e-14)

    def test_parabolic_lower_well(self):
        assert wells.gamma(moving_spec(), 0.3) == pytest.approx(1.09, abs=1e-14)

    def test_outside_domain_raises(self):
        spec = wells.constant_quartic(bounds=np.array([[0.0, 1.0]]))
        with pytest.raises(DomainError):
            wells.gamma(spec, 1.5)


class TestNormalizedWell:
    def test_canonical_midpoint(self):
        spec = wells.constant_quartic()
        assert wells.normalized_well(spec, 0.2, 0.5) == pytest.approx(0.0625)

    def test_vanishes_at_wells(self):
        spec = moving_spec()
        assert wells.normalized_well(spec, 0.4, 0.0) == pytest.approx(0.0, abs=1e-14)
        assert wells.normalized_well(spec, 0.4, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_gamma_two_closed_form(self):
        spec = wells.constant_quartic(0.0, 2.0)
        # W_n = gamma^4 v^2 (1-v)^2 = 16 * 0.0625 = 1 at v = 1/2
        assert wells.normalized_well(spec, 0.1, 0.5) == pytest.approx(1.0)


class TestSurfaceTension:
    def test_canonical(self):
        spec = wells.constant_quartic()
        assert_allclose(wells.surface_tension(spec, 0.3), SQRT2_6, rtol=1e-10)

    def test_amplitude_scales_as_sqrt(self):
        spec = wells.constant_quartic(amplitude=4.0)  # 1 + q with q = 3
        assert_allclose(wells.surface_tension(spec, 0.3), 2 * SQRT2_6,
                        rtol=1e-10)

    def test_gamma_two(self):
        spec = wells.constant_quartic(0.0, 2.0)
        assert_allclose(wells.surface_tension(spec, 0.3),
                        np.sqrt(2.0) * 8.0 / 6.0, rtol=1e-10)

    def test_batch_matches_closed_form(self):
        spec = moving_spec()
        xs = np.random.default_rng(0).uniform(0.0, 1.0, size=(20, 1))
        assert_allclose(wells.surface_tension(spec, xs),
                        spec.sigma_exact(xs), rtol=1e-9)


class TestSigmaN:
    def test_canonical(self):
        spec = wells.constant_quartic()
        assert_allclose(wells.sigma_n(spec, 0.7), SQRT2_6, rtol=1e-10)

    def test_gamma_two(self):
        spec = wells.constant_quartic(0.0, 2.0)
        assert_allclose(wells.sigma_n(spec, 0.7), 0.9428090415820634,
                        rtol=1e-10)

    def test_definitional_identity(self):
        spec = moving_spec()
        xs = np.random.default_rng(1).uniform(0.0, 1.0, size=(20, 1))
        tol = 1e-10
        sig = wells.surface_tension(spec, xs, tol=tol)
        sn = wells.sigma_n(spec, xs, tol=tol)
        g = wells.gamma(spec, xs)
        assert np.max(np.abs(sn * g - sig)) <= 2 * tol * np.max(np.abs(sig)) + 2 * tol


class TestGeodesicDistance:
    def test_empty_integral(self):
        spec = wells.constant_quartic()
        assert wells.geodesic_distance(spec, 0.3, 0.0) == 0.0

    def test_full_interval_equals_sigma_n(self):
        spec = wells.constant_quartic()
        assert_allclose(wells.geodesic_distance(spec, 0.3, 1.0), SQRT2_6,
                        rtol=1e-9)

    def test_half_interval(self):
        spec = wells.constant_quartic()
        assert_allclose(wells.geodesic_distance(spec, 0.3, 0.5),
                        np.sqrt(2.0) / 12.0, rtol=1e-9)

    def test_nondecreasing_and_endpoints(self):
        spec = moving_spec()
        vs = np.linspace(0.0, 1.0, 11)
        ds = [wells.geodesic_distance(spec, 0.25, v) for v in vs]
        assert all(d1 >= d0 - 1e-12 for d0, d1 in zip(ds, ds[1:]))
        assert ds[0] == 0.0
        assert_allclose(ds[-1], wells.sigma_n(spec, 0.25), rtol=1e-8)

    def test_signed_for_negative_v(self):
        spec = wells.constant_quartic()
        assert wells.geodesic_distance(spec, 0.3, -0.3) < 0


class TestOptimalProfile:
    def test_initial_condition(self):
        spec = wells.constant_quartic()
        assert wells.optimal_profile(spec, 0.3, 0.0) == pytest.approx(0.5)

    def test_logistic_closed_form(self):
        spec = wells.constant_quartic()
        s = np.array([-3.0, -0.7, 0.4, 1.0, 2.5, 9.0])
        exact = 1.0 / (1.0 + np.exp(-np.sqrt(2.0) * s))
        assert_allclose(wells.optimal_profile(spec, 0.3, s), exact, atol=1e-8)

    def test_gamma_two_rate(self):
        # equipartitioned profile: du/ds = sqrt(2 W(u)) gives rate
        # sqrt(2) gamma for the quartic, logistic in v
        spec = wells.constant_quartic(0.0, 2.0)
        got = wells.optimal_profile(spec, 0.3, 1.0)
        assert_allclose(got, 1.0 / (1.0 + np.exp(-2.0 * np.sqrt(2.0))),
                        atol=1e-8)

    def test_monotone_with_saturating_tails(self):
        spec = moving_spec()
        s = np.linspace(-40.0, 40.0, 81)
        v = wells.optimal_profile(spec, 0.6, s)
        # monotone up to the integrator tolerance (dense-output wiggle in
        # the exponential tails sits at the atol scale)
        assert np.all(np.diff(v) >= -1e-9)
        assert v[0] <= 1e-9 and v[-1] >= 1.0 - 1e-9

    def test_pointwise_equipartition_identity(self):
        # gamma dv/ds = sqrt(2 W_n(v)) along the profile
        spec = wells.constant_quartic(0.0, 1.5)
        s = np.linspace(-2.0, 2.0, 9)
        delta = 1e-5
        vp = (wells.optimal_profile(spec, 0.3, s + delta)
              - wells.optimal_profile(spec, 0.3, s - delta)) / (2 * delta)
        v = wells.optimal_profile(spec, 0.3, s)
        rhs = np.sqrt(2.0 * wells.normalized_well(spec, 0.3, v)) / 1.5
        assert_allclose(vp, rhs, rtol=1e-6)


class TestProfileGrid:
    def test_matches_scalar_solver_heterogeneous(self):
        spec = wells.affine_scaled_quartic(offset=1.0, slope=2.0)
        rng = np.random.default_rng(7)
        pts = rng.uniform(0.0, 1.0, size=(30, 2))
        s = rng.uniform(-15.0, 15.0, size=30)
        batch = wells.optimal_profile_grid(spec, pts, s)
        single = np.array([wells.optimal_profile(spec, p, si)
                           for p, si in zip(pts, s)])
        assert_allclose(batch, single, atol=1e-7)

    def test_exact_for_quartic_family(self):
        spec = wells.constant_quartic(0.0, 2.0, amplitude=3.0)
        rng = np.random.default_rng(8)
        pts = rng.uniform(0.0, 1.0, size=(50, 1))
        s = rng.uniform(-6.0, 6.0, size=50)
        assert_allclose(wells.optimal_profile_grid(spec, pts, s),
                        spec.profile_exact(pts, s), atol=1e-12)

    def test_moving_wells(self):
        spec = moving_spec()
        rng = np.random.default_rng(9)
        pts = rng.uniform(0.1, 0.9, size=(20, 1))
        s = rng.uniform(-10.0, 10.0, size=20)
        single = np.array([wells.optimal_profile(spec, p, si)
                           for p, si in zip(pts, s)])
        assert_allclose(wells.optimal_profile_grid(spec, pts, s), single,
                        atol=1e-7)


class TestValidateAssumptions:
    def test_quadratic_growth_near_wells(self):
        spec = wells.constant_quartic()
        pts = np.random.default_rng(2).uniform(0.0, 1.0, size=(10, 2))
        us = np.array([-0.01, 0.01, 0.99, 1.01])
        rep = wells.validate_assumptions(spec, pts, us)
        assert rep.ok()
        assert rep.c2_quadratic / rep.c1_quadratic < 1.1

    def test_constant_landscape_has_zero_derivative_control(self):
        spec = wells.constant_quartic()
        pts = np.linspace(0.1, 0.9, 7).reshape(-1, 1)
        us = np.linspace(-0.5, 1.5, 21)
        rep = wells.validate_assumptions(spec, pts, us)
        assert rep.c_derivative_control <= 1e-9

    def test_multiplicative_heterogeneity_ratio(self):
        # W = (1 + sin^2(pi x)) u^2 (1-u)^2: the ratio is v-independent
        # and equals |m'| / (2 m)
        spec = wells.canonical_quartic(
            a=lambda x: np.zeros(np.shape(x)[:-1]),
            grad_a=lambda x: np.zeros(np.shape(x)),
            b=lambda x: np.ones(np.shape(x)[:-1]),
            grad_b=lambda x: np.zeros(np.shape(x)),
            delta_sep=1.0,
            amplitude=lambda x: 1.0 + np.sin(np.pi * x[..., 0]) ** 2,
            grad_amplitude=lambda x: np.stack(
                [np.pi * np.sin(2.0 * np.pi * x[..., 0])], axis=-1))
        pts = np.linspace(0.05, 0.95, 19).reshape(-1, 1)
        us = np.linspace(0.1, 0.9, 9)
        rep = wells.validate_assumptions(spec, pts, us)
        m = 1.0 + np.sin(np.pi * pts[:, 0]) ** 2
        dm = np.pi * np.sin(2.0 * np.pi * pts[:, 0])
        expected = np.max(np.abs(dm) / (2.0 * m))
        assert rep.ok()
        assert rep.c_derivative_control == pytest.approx(expected, rel=1e-4)

    def test_flags_nonvanishing_well(self):
        bad = wells.WellSpec(
            a=lambda x: np.zeros(np.shape(x)[:-1]),
            b=lambda x: np.ones(np.shape(x)[:-1]),
            grad_a=lambda x: np.zeros(np.shape(x)),
            grad_b=lambda x: np.zeros(np.shape(x)),
            W=lambda x, u: (u - 0.0) ** 2 * (u - 1.0) ** 2 + 1e-3,
            dW_du=lambda x, u: 2 * u * (u - 1) * (2 * u - 1),
            dW_dx=lambda x, u: np.zeros(np.shape(x)),
            delta_sep=1.0)
        rep = wells.validate_assumptions(bad, np.array([[0.5]]),
                                         np.linspace(0, 1, 5))
        assert not rep.ok()


class TestQuadrature:
    def test_smooth_integrand(self):
        val, err = adaptive_gauss_legendre(np.sin, 0.0, np.pi, tol=1e-12)
        assert_allclose(val, 2.0, atol=1e-12)
        assert err <= 1e-11

    def test_reversed_interval_is_signed(self):
        val, _ = adaptive_gauss_legendre(np.sin, np.pi, 0.0, tol=1e-12)
        assert_allclose(val, -2.0, atol=1e-12)

    def test_kinked_integrand(self):
        val, _ = adaptive_gauss_legendre(lambda t: np.sqrt(np.abs(t)),
                                         0.0, 1.0, tol=1e-11)
        assert_allclose(val, 2.0 / 3.0, atol=1e-10)
