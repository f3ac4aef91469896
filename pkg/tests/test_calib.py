"""Calibrations, relative/bulk energies, coercivity, Gronwall fits."""

import csv

import numpy as np
import pytest
from numpy.testing import assert_allclose

from wmcflab import calib, sharp
from wmcflab.errors import GeometryError
from wmcflab.grid import Field, Grid

SQRT2_6 = 0.23570226039551587
CENTER = (0.5, 0.5)


def radial_setup(r0=0.4, t_end=0.04):
    sig_s = sharp.constant_scalar_sigma(SQRT2_6)
    sigma = sig_s.about(CENTER)
    traj = sharp.evolve_radial(r0, sig_s, t_end, tol=1e-12, center=CENTER)
    return traj, sigma


def frozen_sphere(radius=0.3):
    """Static sphere with zero velocity (frozen test trajectory)."""
    times = np.linspace(0.0, 1.0, 9)
    return sharp.SharpTrajectory(kind="sphere", times=times,
                                 positions=np.full(9, radius),
                                 velocities=np.zeros(9), center=CENTER)


class TestBuildCalibration:
    def test_defaults(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        r_min = float(np.min(traj.positions))
        assert cal.r == pytest.approx(0.4 * r_min)
        assert cal.c == pytest.approx(1.01 / cal.r ** 2)
        assert cal.r_g <= cal.r

    def test_boundary_identities(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        t = 0.02
        iface = traj.interface_at(t)
        pts, _, normals = iface.boundary_nodes(128)
        xi = cal.xi(pts, t)
        assert np.max(np.abs(np.sum(xi * normals, axis=-1) - 1.0)) <= 1e-14
        B = cal.B(pts, t)
        v = cal.velocity_scalar(t)
        assert np.max(np.linalg.norm(B - v * normals, axis=-1)) <= 1e-12
        # |B| = V = (N-1)/R for constant sigma
        assert_allclose(np.linalg.norm(B, axis=-1), 1.0 / iface.radius,
                        rtol=1e-9)

    def test_cutoff_saturation_outside_tube(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        t = 0.01
        R = float(traj.position(t))
        far = np.array([[0.5 + R + cal.r + 0.05, 0.5],
                        [0.5, 0.5 - R - cal.r - 0.05]])
        assert np.max(np.linalg.norm(cal.xi(far, t), axis=-1)) == 0.0
        assert_allclose(np.abs(cal.theta(far, t)), cal.r, atol=1e-14)

    def test_xi_length_bound_sampled(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        rng = np.random.default_rng(0)
        pts = np.array(CENTER) + rng.uniform(-0.5, 0.5, size=(4000, 2))
        for t in (0.0, 0.02, 0.039):
            dist = cal.distance(pts, t)
            bound = np.maximum(0.0, 1.0 - cal.c * dist ** 2)
            assert np.max(np.linalg.norm(cal.xi(pts, t), axis=-1) - bound) <= 1e-14

    def test_tube_too_wide_raises(self):
        traj, sigma = radial_setup()
        with pytest.raises(GeometryError):
            calib.build_calibration(traj, sigma, r=0.5)

    def test_point_trajectory_rejected(self):
        sig = sharp.constant_scalar_sigma(1.0)
        traj = sharp.evolve_point1d(0.5, sig, 0.1, tol=1e-10)
        with pytest.raises(GeometryError):
            calib.build_calibration(traj, sig.along_axis())


class TestResiduals:
    def test_on_interface_residuals_small(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        for t in (0.01, 0.03):
            pts, _, _ = traj.interface_at(t).boundary_nodes(32)
            res = calib.calibration_residuals(cal, pts, [t])
            assert res.r1.max() <= 1e-3
            assert res.r2.max() <= 1e-3
            assert res.r3.max() <= 1e-5
            assert res.r4.max() <= 1e-12

    def test_frozen_sphere_r3_vanishes(self):
        traj = frozen_sphere()
        sigma = sharp.constant_scalar_sigma(1.0).about(CENTER)
        cal = calib.build_calibration(traj, sigma)
        rng = np.random.default_rng(1)
        pts = np.array(CENTER) + rng.uniform(-0.4, 0.4, size=(500, 2))
        res = calib.calibration_residuals(cal, pts, [0.5])
        # nothing depends on t; what remains is interpolation roundoff
        # amplified by the differencing step
        assert res.r3.max() <= 1e-11
        assert res.r1.max() <= 1e-11
        assert res.r2.max() <= 1e-11

    def test_ratios_stable_under_fd_halving(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        rng = np.random.default_rng(2)
        pts = np.array(CENTER) + rng.uniform(-0.45, 0.45, size=(1500, 2))
        times = np.linspace(0.002, 0.038, 5)
        r_a = calib.calibration_residuals(cal, pts, times, fd_dt=1e-4).ratios()
        r_b = calib.calibration_residuals(cal, pts, times, fd_dt=5e-5).ratios()
        for k in r_a:
            assert r_a[k] > 0 and np.isfinite(r_a[k])
            assert max(r_a[k], r_b[k]) / min(r_a[k], r_b[k]) <= 2.0

    def test_times_outside_window_raise(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        with pytest.raises(ValueError):
            calib.calibration_residuals(cal, np.array([[0.5, 0.8]]), [0.0])


class TestEnergies:
    def test_relative_energy_of_identical_interface(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        e = calib.relative_energy(traj.interface_at(0.02), cal, sigma, 0.02)
        assert abs(e) <= 1e-14

    def test_relative_energy_matches_cutoff_closed_form(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        t, delta = 0.01, 0.015
        R = float(traj.position(t))
        weak = sharp.Sphere(CENTER, R + delta)
        e = calib.relative_energy(weak, cal, sigma, t)
        g = (1.0 - (delta / cal.r_g) ** 2) ** 2
        expected = 2 * np.pi * (R + delta) * SQRT2_6 * (1.0 - g)
        assert_allclose(e, expected, rtol=1e-12)

    def test_tube_exterior_weak_interface_pays_full_perimeter(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        weak = sharp.Sphere(CENTER, 0.05)  # far inside, outside the tube
        e = calib.relative_energy(weak, cal, sigma, 0.01)
        assert_allclose(e, sharp.weighted_perimeter(weak, sigma), rtol=1e-12)

    def test_bulk_energy_zero_for_equal_sets(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        assert calib.bulk_energy(traj.interface_at(0.02), cal, sigma,
                                 0.02) == 0.0

    def test_bulk_energy_annulus_closed_form(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        t, delta = 0.01, 0.02  # delta < r/2, so theta = sdist there
        R = float(traj.position(t))
        weak = sharp.Sphere(CENTER, R + delta)
        got = calib.bulk_energy(weak, cal, sigma, t)
        # int_R^{R+d} sigma (rho - R) 2 pi rho drho
        expected = 2 * np.pi * SQRT2_6 * (delta ** 2 * R / 2 + delta ** 3 / 3)
        assert_allclose(got, expected, rtol=1e-10)
        assert got > 0

    def test_bulk_energy_grid_route_agrees(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        t, delta = 0.01, 0.02
        R = float(traj.position(t))
        weak = sharp.Sphere(CENTER, R + delta)
        grid = Grid.box((0, 0), (1, 1), (256, 256))
        chi = Field(grid, sharp.indicator(weak, grid.points()))
        by_grid = calib.bulk_energy(chi, cal, sigma, t)
        exact = calib.bulk_energy(weak, cal, sigma, t)
        assert abs(by_grid - exact) <= 0.05 * exact + 1e-5

    def test_bulk_energy_complement_strictly_positive(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        grid = Grid.box((0, 0), (1, 1), (128, 128))
        chi = Field(grid, 1.0 - sharp.indicator(traj.interface_at(0.01),
                                                grid.points()))
        assert calib.bulk_energy(chi, cal, sigma, 0.01) > 0.01


class TestCoercivity:
    def test_identity_and_slack(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        weak = sharp.Sphere(CENTER, float(traj.position(0.02)) + 0.015)
        rep = calib.coercivity_check(weak, cal, sigma, 0.02)
        assert rep.identity_error <= 1e-14
        assert rep.slack >= 0.0
        assert rep.tilt <= rep.e_rel

    def test_equal_interfaces_all_zero(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        rep = calib.coercivity_check(traj.interface_at(0.02), cal, sigma, 0.02)
        assert rep.tilt <= 1e-14 and rep.e_rel <= 1e-14

    def test_exterior_interface_reports_constants(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        rep = calib.coercivity_check(sharp.Sphere(CENTER, 0.05), cal, sigma,
                                     0.01)
        assert rep.c_dist is not None and rep.c_dist > 0
        assert rep.c_theta is not None and rep.c_theta > 0


class TestGronwall:
    def test_identical_trajectories_stay_at_zero(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        other = sharp.evolve_radial(0.4, sharp.constant_scalar_sigma(SQRT2_6),
                                    0.04, tol=1e-12, center=CENTER)
        times = np.linspace(0.0, 0.038, 21)
        rep = calib.gronwall_verify(calib.ComparisonPair(other, traj), cal,
                                    sigma, times)
        assert rep.zero_initial and rep.zero_preserved

    def test_perturbed_radius_fitted_constant(self):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        pert = sharp.evolve_radial(0.42, sharp.constant_scalar_sigma(SQRT2_6),
                                   0.04, tol=1e-12, center=CENTER)
        times = np.linspace(0.0, 0.038, 41)
        rep = calib.gronwall_verify(calib.ComparisonPair(pert, traj), cal,
                                    sigma, times)
        assert np.isfinite(rep.fitted_c_rel) and rep.fitted_c_rel > 0
        assert rep.stable_within(2.0)
        assert rep.exp_bound_holds
        assert np.all(rep.e_rel >= 0) and np.all(rep.e_bulk >= 0)
        assert np.all(rep.coercivity_slack >= 0)

    def test_csv_export(self, tmp_path):
        traj, sigma = radial_setup()
        cal = calib.build_calibration(traj, sigma)
        pert = sharp.evolve_radial(0.41, sharp.constant_scalar_sigma(SQRT2_6),
                                   0.04, tol=1e-12, center=CENTER)
        times = np.linspace(0.0, 0.038, 9)
        rep = calib.gronwall_verify(calib.ComparisonPair(pert, traj), cal,
                                    sigma, times)
        path = tmp_path / "gronwall.csv"
        rep.to_csv(path)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["t", "E_rel", "E_bulk", "coercivity_slack",
                           "fitted_C"]
        assert len(rows) == 10


def test_invariant_report():
    traj, sigma = radial_setup()
    cal = calib.build_calibration(traj, sigma)
    inv = calib.calibration_invariants(cal, np.linspace(0, 0.04, 5),
                                       n_per_time=400)
    assert inv.ok()
    assert inv.n_samples == 2000
