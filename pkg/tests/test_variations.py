"""Recovery states, equipartition diagnostics, first-variation routes."""

import csv

import numpy as np
import pytest
from numpy.testing import assert_allclose

from wmcflab import flow, sharp, variations as var, wells
from wmcflab.errors import GeometryError, ResolutionError
from wmcflab.grid import Field, Grid, extract_levelset
from wmcflab.testfields import (check_admissible, dilation_field,
                                translation_field, zero_field)

SQRT2_6 = 0.23570226039551587
CENTER = (0.5, 0.5)


def disk():
    return sharp.Sphere(CENTER, 0.3)


class TestAdmissibility:
    def test_library_fields_vanish_on_boundary(self):
        g = Grid.box((0, 0), (1, 1), (64, 64))
        for psi in (dilation_field(CENTER, 0.38, 0.47),
                    translation_field((1, 0), CENTER, 0.38, 0.47)):
            assert check_admissible(psi, g) <= 1e-12


class TestBuildRecovery:
    def test_point1d_energy_near_sigma(self):
        spec = wells.constant_quartic()
        g = Grid.interval(0.0, 1.0, 1024)
        rec = var.build_recovery(sharp.Point1D(0.5), spec, g, 0.02)
        assert SQRT2_6 - 0.01 <= rec.energy_diffuse <= SQRT2_6 + 0.01

    def test_disk_energy_approaches_weighted_perimeter(self):
        # the gap has signed tail-truncation and resolution components, so
        # assert smallness at every eps rather than monotonicity
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (256, 256))
        target = 2 * np.pi * 0.3 * SQRT2_6
        for eps in (0.08, 0.04, 0.02):
            rec = var.build_recovery(disk(), spec, g, eps)
            assert rec.energy_sharp == pytest.approx(target, rel=1e-10)
            assert abs(rec.energy_diffuse - target) <= 1e-3

    def test_tail_values_sit_in_the_wells(self):
        # logistic tails: within 2e-5 of the wells at distance 8 eps and
        # within 1e-6 at distance 10 eps (exp(-sqrt(2) d/eps) oracle)
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (256, 256))
        eps = 0.02
        rec = var.build_recovery(disk(), spec, g, eps)
        pts = g.points()
        sd = disk().signed_distance(pts)
        u = rec.state.u.values
        dist_to_wells = np.minimum(np.abs(u), np.abs(u - 1.0))
        assert np.max(dist_to_wells[np.abs(sd) >= 8 * eps]) <= 2e-5
        assert np.max(dist_to_wells[np.abs(sd) >= 10 * eps]) <= 1e-6

    def test_values_stay_between_wells(self):
        spec = wells.linear_wells_quartic(0.0, 0.3, 1.0, 0.0,
                                          bounds=np.array([[0., 1.], [0., 1.]]))
        g = Grid.box((0, 0), (1, 1), (128, 128))
        rec = var.build_recovery(disk(), spec, g, 0.06)
        pts = g.points()
        assert np.all(rec.state.u.values >= spec.a(pts) - 1e-12)
        assert np.all(rec.state.u.values <= spec.b(pts) + 1e-12)

    def test_level_set_recovers_interface(self):
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (256, 256))
        eps = 0.02
        rec = var.build_recovery(disk(), spec, g, eps)
        _, radius = extract_levelset(rec.state.u, 0.5).fitted_circle()
        h = float(np.max(g.spacing))
        assert abs(radius - 0.3) <= h + 10 * eps ** 2

    def test_underresolved_eps_raises(self):
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (32, 32))
        with pytest.raises(ResolutionError):
            var.build_recovery(disk(), spec, g, 0.02)

    def test_interface_too_close_to_boundary_raises(self):
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (256, 256))
        with pytest.raises(GeometryError):
            var.build_recovery(sharp.Sphere(CENTER, 0.45), spec, g, 0.04)


class TestEquipartition:
    def test_well_state_has_zero_defect(self):
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (32, 32))
        st = flow.PhaseState(Field.constant(g, 1.0), 0.05)
        assert var.equipartition_defect(st, spec) == 0.0

    def test_exact_1d_profile_defect_below_tolerance(self):
        spec = wells.constant_quartic()
        g = Grid.interval(0.0, 1.0, 2048)
        rec = var.build_recovery(sharp.Point1D(0.5), spec, g, 0.05)
        assert var.equipartition_defect(rec.state, spec) <= 1e-6

    def test_defect_decreases_on_disk_sweep(self):
        spec = wells.linear_wells_quartic(0.0, 0.4, 1.0, 0.0,
                                          bounds=np.array([[0., 1.], [0., 1.]]))
        g = Grid.box((0, 0), (1, 1), (256, 256))
        defects = [var.equipartition_defect(
            var.build_recovery(disk(), spec, g, eps).state, spec)
            for eps in (0.08, 0.04, 0.02)]
        assert defects[2] < defects[1] < defects[0]

    def test_square_expansion_identity(self):
        # E_eps - int sqrt(2W)|grad u| = defect/2 exactly for the shared
        # discrete quadratures
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (64, 64))
        pts = g.points()
        rng = np.random.default_rng(0)
        st = flow.PhaseState(
            Field(g, 0.5 + 0.4 * np.sin(5 * pts[..., 0]) * pts[..., 1]), 0.06)
        e = flow.energy(st, spec)
        geo = var.measure_pairing(st, spec, "geometric", Field.constant(g, 1.0))
        defect = var.equipartition_defect(st, spec)
        assert abs((e - geo) - 0.5 * defect) <= 1e-10 * max(1.0, e)


class TestMeasurePairings:
    def setup_method(self):
        self.spec = wells.constant_quartic()
        self.g = Grid.interval(0.0, 1.0, 1024)
        self.rec = var.build_recovery(sharp.Point1D(0.5), self.spec, self.g,
                                      0.02)

    def test_geometric_density_pairs_to_sigma(self):
        val = var.measure_pairing(self.rec.state, self.spec, "geometric",
                                  Field.constant(self.g, 1.0))
        assert abs(val - SQRT2_6) <= 5 * (0.02 + self.g.spacing[0] ** 2)

    def test_faraway_test_function_pairs_to_nothing(self):
        psi = Field.from_function(
            self.g, lambda p: np.exp(-((p[..., 0] - 0.05) / 0.02) ** 2))
        val = var.measure_pairing(self.rec.state, self.spec, "geometric", psi)
        assert abs(val) <= 1e-8

    def test_pairwise_gaps_bounded_by_defect(self):
        # |int (a^2 - b^2)| <= sqrt(defect * 4E) via Cauchy-Schwarz
        st, spec = self.rec.state, self.spec
        one = Field.constant(self.g, 1.0)
        pot = var.measure_pairing(st, spec, "potential", one)
        gra = var.measure_pairing(st, spec, "gradient", one)
        geo = var.measure_pairing(st, spec, "geometric", one)
        defect = var.equipartition_defect(st, spec)
        e = flow.energy(st, spec)
        bound = np.sqrt(defect * 4 * e) + 1e-12
        assert abs(pot - gra) <= bound
        assert abs(pot - geo) <= bound
        assert abs(gra - geo) <= bound

    def test_unknown_density_raises(self):
        with pytest.raises(ValueError):
            var.measure_pairing(self.rec.state, self.spec, "bogus",
                                Field.constant(self.g, 1.0))


class TestFirstVariation:
    def test_zero_field_gives_zero(self):
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (128, 128))
        rec = var.build_recovery(disk(), spec, g, 0.06)
        fv = var.diffuse_first_variation(rec.state, spec, zero_field(2))
        assert fv.value == 0.0 and fv.reassembled == 0.0

    def test_sharp_dilation_value(self):
        sig = sharp.constant_scalar_sigma(SQRT2_6).about(CENTER)
        val = var.sharp_first_variation(disk(), sig,
                                        dilation_field(CENTER, 0.38, 0.47))
        assert_allclose(val, -2 * np.pi * 0.3 * SQRT2_6, atol=1e-9)

    def test_translation_invariance_diffuse(self):
        # constant sigma: a field constant near the interface pairs to
        # o(1); the cutoff annulus is placed off-center so only the
        # profile tails reach it (a symmetric placement cancels to
        # roundoff and shows nothing)
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (256, 256))
        tr = translation_field((1, 0), (0.55, 0.5), 0.36, 0.44)
        vals = [abs(var.diffuse_first_variation(
            var.build_recovery(disk(), spec, g, eps).state, spec, tr).value)
            for eps in (0.08, 0.04)]
        assert vals[1] < vals[0] / 2.0

    def test_routes_agree_and_tighten_under_refinement(self):
        spec = wells.affine_scaled_quartic(offset=1.0, slope=1.0)
        psi = dilation_field(CENTER, 0.38, 0.47)
        gaps = []
        for eps, n in ((0.08, 64), (0.04, 256)):
            g = Grid.box((0, 0), (1, 1), (n, n))
            rec = var.build_recovery(disk(), spec, g, eps)
            gaps.append(var.diffuse_first_variation(rec.state, spec, psi).gap)
        assert gaps[1] < gaps[0]

    def test_sweep_table_and_csv(self, tmp_path):
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (128, 128))
        tab = var.first_variation_convergence(
            [0.08, 0.04], disk(), spec, dilation_field(CENTER, 0.38, 0.47), g)
        assert tab.gaps_strictly_decreasing()
        path = tmp_path / "sweep.csv"
        tab.to_csv(path)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["eps", "diffuse", "sharp", "gap", "defect",
                           "energy", "energy_sharp"]
        assert len(rows) == 3

    def test_zero_field_sweep_rows_are_zero(self):
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (128, 128))
        tab = var.first_variation_convergence([0.08], disk(), spec,
                                              zero_field(2), g)
        assert tab.rows[0].diffuse == 0.0
        assert tab.rows[0].sharp == 0.0

    def test_underresolved_sweep_raises(self):
        spec = wells.constant_quartic()
        g = Grid.box((0, 0), (1, 1), (64, 64))
        with pytest.raises(ResolutionError):
            var.first_variation_convergence([0.01], disk(), spec,
                                            zero_field(2), g)
