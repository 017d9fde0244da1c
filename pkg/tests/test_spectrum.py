import math

import numpy as np
import pytest

from flagdyn.cocycle import BilinearControlSystem
from flagdyn.lie import AlgebraSpec, CartanVector, FlagType, RootFunctional, WeylElement, parse_roots
from flagdyn.spectrum import (
    SamplingPlan,
    ScalarSpectrum,
    SpectrumPolytope,
    center_symmetrize,
    entropy_lower_bound,
    estimate_attractor_polytope,
    hull_vertices,
    infer_flag_type,
    regular_lyapunov_spectrum,
    regular_lyapunov_values,
    scalar_spectrum,
    weyl_residual,
)

SL2 = AlgebraSpec((2,))
SL3 = AlgebraSpec((3,))
DIAG = np.diag([1.0, -1.0])


def point(*flat, spec=SL3, theta_phi=None):
    return SpectrumPolytope.from_points(spec, [flat], theta_phi=theta_phi)


class TestSamplingPlan:
    def test_validation(self):
        with pytest.raises(ValueError):
            SamplingPlan(horizon=0)
        with pytest.raises(ValueError):
            SamplingPlan(include_vertices=False)
        with pytest.raises(ValueError):
            SamplingPlan(dwell_min=2, dwell_max=1)

    def test_signal_count_and_determinism(self):
        sys_ = BilinearControlSystem(SL2, (DIAG,), ((np.array([[0, 1.0], [1, 0]]),),), (-0.1,), (0.1,))
        plan = SamplingPlan(horizon=5, n_random=4, seed=3)
        a, b = plan.signals(sys_), plan.signals(sys_)
        assert len(a) == 2 + 1 + 4
        assert [s.segments for s in a] == [s.segments for s in b]
        for s in a[3:]:
            assert sum(d for d, _ in s.segments) >= 5
            assert all(v[0] in (-0.1, 0.1) for _, v in s.segments)

    def test_no_controls(self):
        sys_ = BilinearControlSystem(SL2, (DIAG,))
        assert len(SamplingPlan(n_random=5).signals(sys_)) == 1


class TestEstimate:
    def test_no_controls_single_vertex(self):
        sys_ = BilinearControlSystem(SL2, (DIAG,))
        poly = estimate_attractor_polytope(sys_, SamplingPlan(horizon=10, n_random=0))
        assert len(poly.vertices) == 1
        assert np.allclose(poly.vertices[0].flat, [1.0, -1.0], atol=1e-6)

    def test_commuting_segment(self):
        rho = 0.3
        sys_ = BilinearControlSystem(SL2, (DIAG,), ((DIAG,),), (-rho,), (rho,))
        poly = estimate_attractor_polytope(sys_, SamplingPlan(horizon=10, n_random=6, seed=1))
        # oracle: constant extremal controls give exp(t (1 +- rho) H) exactly
        assert poly.theta_phi == FlagType.empty(SL2)
        assert np.allclose(poly.matrix(), [[1 + rho, -1 - rho], [1 - rho, -1 + rho]], atol=1e-6)
        # constant controls have no transient; random switching averages do move with T
        const = estimate_attractor_polytope(sys_, SamplingPlan(horizon=10, n_random=0))
        assert const.halving_delta < 1e-6
        assert poly.halving_delta > 0

    def test_threads_give_same_result(self):
        sys_ = BilinearControlSystem(SL2, (DIAG,), ((np.array([[0, 1.0], [1, 0]]),),), (-0.5,), (0.5,))
        plan = SamplingPlan(horizon=4, n_random=5, seed=2)
        a = estimate_attractor_polytope(sys_, plan, workers=1)
        b = estimate_attractor_polytope(sys_, plan, workers=3)
        assert np.array_equal(a.matrix(), b.matrix())


class TestHull:
    def test_square_interior_dropped(self):
        pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5]], dtype=float)
        assert len(hull_vertices(pts)) == 4

    def test_collinear(self):
        pts = np.array([[0, 0, 0], [1, -1, 0], [0.5, -0.5, 0], [2, -2, 0]], dtype=float)
        v = hull_vertices(pts)
        assert v.tolist() == [[2, -2, 0], [0, 0, 0]]

    def test_duplicate_points(self):
        v = hull_vertices(np.array([[1.0, -1.0]] * 3))
        assert v.tolist() == [[1.0, -1.0]]

    def test_contains(self):
        poly = SpectrumPolytope.from_points(SL3, [(1, 1, -2), (2, 0, -2)], theta_phi=FlagType.empty(SL3))
        assert poly.contains((1.5, 0.5, -2))
        assert not poly.contains((3, 0, -3))


class TestInferFlagType:
    def test_alpha12(self):
        theta, warn = infer_flag_type(SpectrumPolytope.from_points(SL3, [(1, 1, -2)], symmetrize=False))
        assert theta == FlagType.parse("[a12]", SL3)
        assert warn == ()

    def test_regular(self):
        theta, _ = infer_flag_type(SpectrumPolytope.from_points(SL3, [(2, 0, -2)], symmetrize=False))
        assert theta == FlagType.empty(SL3)

    def test_ambiguity_band(self):
        poly = SpectrumPolytope.from_points(SL3, [(1.075, 0.925, -2)], symmetrize=False)
        theta, warn = infer_flag_type(poly)
        assert theta == FlagType.empty(SL3)
        assert len(warn) == 1 and "a12" in warn[0]

    def test_from_points_infers(self):
        poly = SpectrumPolytope.from_points(SL3, [(1, 1, -2)])
        assert poly.theta_phi == FlagType.parse("[a12]", SL3)


class TestSymmetrization:
    def test_tie_polytope_gains_reflection(self):
        poly = SpectrumPolytope.from_points(SL3, [(1, 1, -2), (2, 0, -2)], theta_phi=FlagType.parse("[a12]", SL3))
        got = sorted(tuple(v.flat) for v in poly.vertices)
        # (1,1,-2) is the midpoint of (2,0,-2) and its reflection, so it drops out of the hull
        assert got == [(0.0, 2.0, -2.0), (2.0, 0.0, -2.0)]
        assert weyl_residual(poly) <= 1e-9
        assert poly.symmetrization_residual <= 1e-9

    def test_samples_kept_chamber_ordered(self):
        poly = SpectrumPolytope.from_points(SL3, [(1, 1, -2), (2, 0, -2)], theta_phi=FlagType.parse("[a12]", SL3))
        assert all(s.in_closed_chamber() for s in poly.samples)


class TestScalarSpectrum:
    def test_neg_alpha12(self):
        poly = point(1, 1, -2)
        assert scalar_spectrum(poly, parse_roots("{-a12}", SL3)) == ScalarSpectrum.point(0.0)

    def test_two_roots_one_value(self):
        poly = point(1, 1, -2)
        assert scalar_spectrum(poly, parse_roots("{-a13, -a23}", SL3)) == ScalarSpectrum.point(-3.0)

    def test_empty(self):
        assert scalar_spectrum(point(1, 1, -2), []).is_empty

    def test_merge(self):
        s = ScalarSpectrum(((2, 3), (0, 1), (0.5, 2.5)))
        assert s.intervals == ((0.0, 3.0),)
        assert str(ScalarSpectrum(((0, 1), (2, 3)))) == "[0, 1] U [2, 3]"
        assert str(ScalarSpectrum()) == "{}"

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            ScalarSpectrum(((1, 0),))


class TestRegularLyapunov:
    lam = CartanVector.from_flat(SL3, (2, 1, -3))

    def test_theta_empty_identity(self):
        got = regular_lyapunov_spectrum(self.lam, FlagType.empty(SL3), WeylElement.identity(SL3))
        assert got == (-5.0, -4.0, -1.0)

    def test_longest(self):
        got = regular_lyapunov_spectrum(self.lam, FlagType.empty(SL3), WeylElement.parse("(1 3)", SL3))
        assert got == (1.0, 4.0, 5.0)

    def test_theta_a23(self):
        got = regular_lyapunov_spectrum(self.lam, FlagType.parse("[a23]", SL3), WeylElement.identity(SL3))
        assert got == (-5.0, -1.0)

    def test_multiplicity_kept(self):
        vals = regular_lyapunov_values(CartanVector.from_flat(SL3, (1, 1, -2)), FlagType.empty(SL3),
                                       WeylElement.identity(SL3))
        assert vals == [-3.0, -3.0, 0.0]

    def test_requires_chamber(self):
        with pytest.raises(ValueError):
            regular_lyapunov_spectrum(CartanVector.from_flat(SL3, (-3, 1, 2)), FlagType.empty(SL3),
                                      WeylElement.identity(SL3))


class TestCenterSymmetrize:
    def test_closure(self):
        assert center_symmetrize(ScalarSpectrum(((-0.2, 0.5),))) == ScalarSpectrum(((-0.5, 0.5),))

    def test_empty(self):
        assert center_symmetrize(ScalarSpectrum()).is_empty

    def test_point_zero(self):
        assert center_symmetrize(ScalarSpectrum.point(0.0)) == ScalarSpectrum.point(0.0)


class TestEntropy:
    tphi = FlagType.parse("[a12]", SL3)
    full = FlagType.empty(SL3)

    def test_point(self):
        b = entropy_lower_bound(point(1, 1, -2), self.tphi, self.full, WeylElement.parse("(1 3)", SL3))
        assert b.value == pytest.approx(6.0, abs=1e-12)
        assert b.valid
        assert b.plus_roots == parse_roots("{a13, a23}", SL3)

    def test_identity_empty_plus(self):
        b = entropy_lower_bound(point(1, 1, -2), self.tphi, self.full, WeylElement.identity(SL3))
        assert b.value == 0.0
        assert b.valid

    def test_segment_min_vertex(self):
        poly = SpectrumPolytope.from_points(SL3, [(1, 1, -2), (1.2, 1.2, -2.4)], theta_phi=self.tphi)
        b = entropy_lower_bound(poly, self.tphi, self.full, WeylElement.parse("(1 3)", SL3))
        assert b.value == pytest.approx(6.0, abs=1e-12)
        assert b.valid

    def test_invalid_when_center_wide(self):
        poly = SpectrumPolytope.from_points(SL3, [(1.3, 0.7, -2)], theta_phi=self.tphi)
        b = entropy_lower_bound(poly, self.tphi, self.full, WeylElement.parse("(1 3)", SL3))
        assert not b.valid
        assert b.center_spectrum.hi == pytest.approx(0.6)

    def test_homogeneous(self):
        poly = point(1, 1, -2)
        w = WeylElement.parse("(1 3)", SL3)
        a = entropy_lower_bound(poly, self.tphi, self.full, w).value
        b = entropy_lower_bound(poly.scaled(2.5), self.tphi, self.full, w).value
        assert b == pytest.approx(2.5 * a)


def test_root_value_interval():
    poly = SpectrumPolytope.from_points(SL3, [(1, 1, -2), (2, 0, -2)], theta_phi=FlagType.empty(SL3))
    a12 = RootFunctional.parse("a12", SL3)
    assert sorted(poly.values(a12).tolist()) == [0.0, 2.0]
    assert math.isclose(scalar_spectrum(poly, [a12]).hi, 2.0)
