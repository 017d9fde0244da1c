import math

import numpy as np
import pytest
from scipy.linalg import expm

from flagdyn.cocycle import (
    BilinearControlSystem,
    ControlSignal,
    IntegrationError,
    UnresolvedSpectrumError,
    a_cocycle,
    a_cocycle_path,
    asymptotic_ray,
    evolve_trail,
    integrate_step,
    oseledets,
    oseledets_from_matrices,
    polar_exponent,
    projective_derivative_exponent,
    trail_summary_rows,
    transported_basepoint,
)
from flagdyn.lie import AlgebraSpec, LieError

from oracles import conjugated_power, dense_log_singular, finite_difference_projective_exponent, symmetric_power_root

SL2 = AlgebraSpec((2,))
SL3 = AlgebraSpec((3,))
DIAG = np.diag([1.0, -1.0])
ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
UPPER = np.array([[1.0, 1.0], [0.0, -1.0]])


def autonomous(a, spec=SL2):
    return BilinearControlSystem(spec, (a,))


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


class TestSystem:
    def test_rejects_trace(self):
        with pytest.raises(LieError):
            autonomous(np.eye(2))

    def test_range_needs_zero_inside(self):
        with pytest.raises(LieError):
            BilinearControlSystem(SL2, (DIAG,), ((DIAG,),), (0.0,), (1.0,))

    def test_generator_out_of_range(self):
        sys_ = BilinearControlSystem(SL2, (DIAG,), ((ROT,),), (-0.1,), (0.1,))
        with pytest.raises(ValueError):
            sys_.generator([0.2])

    def test_vertices(self):
        sys_ = BilinearControlSystem(SL2, (DIAG,), ((ROT,), (UPPER - np.diag([1, -1]),)), (-1, -2), (1, 2))
        assert sorted(tuple(v) for v in sys_.vertices()) == [(-1, -2), (-1, 2), (1, -2), (1, 2)]


class TestSignal:
    def test_pieces_periodic(self):
        sig = ControlSignal(((0.5, (1.0,)), (1.0, (-1.0,))), periodic=True)
        pieces = sig.pieces(0.0, 3.0)
        assert sum(d for d, _ in pieces) == pytest.approx(3.0)
        assert [v[0] for _, v in pieces] == [1.0, -1.0, 1.0, -1.0]

    def test_window_shifts(self):
        sig = ControlSignal(((0.5, (1.0,)), (1.0, (-1.0,))))
        w = sig.window(0.25, 1.0)
        assert w.segments == ((0.25, (1.0,)), (0.5, (-1.0,)))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ControlSignal(((0.0, (1.0,)),))


class TestIntegrateStep:
    def test_zero_drift(self):
        out = integrate_step(autonomous(np.zeros((2, 2))), (), (np.eye(2),), 0.3)
        assert np.allclose(out[0], np.eye(2), atol=0)

    def test_diag_against_expm(self):
        out = integrate_step(autonomous(DIAG), (), (np.eye(2),), 0.1)
        assert np.allclose(out[0], expm(0.1 * DIAG), atol=1e-9, rtol=0)

    def test_rotation_half_turn(self):
        out = integrate_step(autonomous(ROT), (), (np.eye(2),), math.pi)
        assert np.allclose(out[0], -np.eye(2), atol=1e-6)

    def test_determinant_pinned(self):
        out = integrate_step(autonomous(UPPER), (), (np.eye(2),), 0.37)
        assert abs(np.linalg.det(out[0]) - 1.0) <= 1e-10

    def test_nonfinite(self):
        with pytest.raises(IntegrationError):
            integrate_step(autonomous(DIAG), (), (np.full((2, 2), np.nan),), 0.1)

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            integrate_step(autonomous(DIAG), (), (np.eye(2),), 0.0)


class TestTrail:
    def test_diag_log_diag(self):
        tr = evolve_trail(autonomous(DIAG), ControlSignal.constant(), 5.0)
        assert np.allclose(tr.log_diag[-1], [5.0, -5.0], atol=1e-6)

    def test_rotation_log_diag(self):
        tr = evolve_trail(autonomous(ROT), ControlSignal.constant(), 7.3)
        assert np.allclose(tr.log_diag[-1], [0.0, 0.0], atol=1e-9)

    def test_reconstruction_vs_dense(self):
        sys_ = BilinearControlSystem(SL2, (DIAG,), ((ROT,), (UPPER - DIAG,)), (-1.0, -1.0), (1.0, 1.0))
        sig = ControlSignal(((0.3, (0.7, -0.2)), (0.25, (-1.0, 0.5)), (0.45, (0.1, 1.0))))
        tr = evolve_trail(sys_, sig, 1.0)
        dense = tr.dense()[0]
        recon = tr.reconstruct()[0]
        assert np.abs(recon - dense).max() < 1e-6
        # independent oracle: product of exact exponentials of the segments
        g = np.eye(2)
        for d, v in sig.segments:
            g = expm(d * sys_.generator(v)[0]) @ g
        assert np.abs(recon - g).max() < 1e-6

    def test_factor_invariants(self):
        sys_ = BilinearControlSystem(SL3, (np.diag([1.0, 0.5, -1.5]) + np.triu(np.ones((3, 3)), 1),),
                                     ((np.array([[0, -1.0, 0], [1, 0, 0], [0, 0, 0]]),),), (-2.0,), (2.0,))
        sig = ControlSignal(((0.4, (2.0,)), (0.7, (-2.0,))), periodic=True)
        tr = evolve_trail(sys_, sig, 12.0)
        for q, r in zip(tr.qs, tr.rs):
            assert np.allclose(q[0].T @ q[0], np.eye(3), atol=1e-8)
            assert np.linalg.det(q[0]) == pytest.approx(1.0, abs=1e-8)
            assert np.allclose(np.tril(r[0], -1), 0.0, atol=1e-12)
            assert np.all(np.diag(r[0]) > 0)
        assert abs(tr.log_det_steps) < 1e-6

    def test_bad_horizon(self):
        with pytest.raises(ValueError):
            evolve_trail(autonomous(DIAG), ControlSignal.constant(), 0.0)


class TestACocycle:
    def test_diag_sl3(self):
        tr = evolve_trail(autonomous(np.diag([1.0, 0.0, -1.0]), SL3), ControlSignal.constant(), 2.0)
        assert np.allclose(a_cocycle(tr).flat, [2.0, 0.0, -2.0], atol=1e-6)

    def test_rotation_any_basepoint(self):
        tr = evolve_trail(autonomous(ROT), ControlSignal.constant(), 3.0)
        for theta in (0.0, 0.4, 2.0):
            assert np.allclose(a_cocycle(tr, (rotation(theta),)).flat, 0.0, atol=1e-9)

    def test_upper_triangular(self):
        tr = evolve_trail(autonomous(UPPER), ControlSignal.constant(), 3.0)
        assert a_cocycle(tr).flat[0] == pytest.approx(3.0, abs=1e-6)

    def test_basepoint_must_be_rotation(self):
        tr = evolve_trail(autonomous(DIAG), ControlSignal.constant(), 1.0)
        with pytest.raises(LieError):
            a_cocycle(tr, (np.diag([1.0, -1.0]),))

    def test_additivity(self):
        sys_ = BilinearControlSystem(SL2, (DIAG,), ((ROT,),), (-1.5,), (1.5,))
        sig = ControlSignal(((0.6, (1.5,)), (0.4, (-1.5,))), periodic=True)
        full = evolve_trail(sys_, sig, 6.0)
        first = evolve_trail(sys_, sig, 3.0)
        second = evolve_trail(sys_, sig.window(3.0, 6.0), 3.0)
        k0 = (rotation(0.3),)
        k_mid = transported_basepoint(first, k0)
        total = a_cocycle(full, k0).flat
        parts = a_cocycle(first, k0).flat + a_cocycle(second, k_mid).flat
        assert np.allclose(total, parts, atol=1e-8)


class TestPolarExponent:
    def test_diag(self):
        for horizon in (1.0, 5.0, 20.0):
            tr = evolve_trail(autonomous(DIAG), ControlSignal.constant(), horizon)
            assert np.allclose(polar_exponent(tr).flat, [1.0, -1.0], atol=1e-6)

    def test_rotation(self):
        tr = evolve_trail(autonomous(ROT), ControlSignal.constant(), 10.0)
        assert np.allclose(polar_exponent(tr).flat, 0.0, atol=1e-9)

    def test_upper_converges_with_halving_error(self):
        e = {}
        for horizon in (25.0, 50.0):
            tr = evolve_trail(autonomous(UPPER), ControlSignal.constant(), horizon)
            lam = polar_exponent(tr).flat
            oracle = np.log(np.linalg.svd(expm(horizon * UPPER), compute_uv=False)) / horizon
            assert np.allclose(lam, oracle, atol=1e-8)
            e[horizon] = abs(lam[0] - 1.0)
        assert e[50.0] < 2e-2
        assert e[25.0] / e[50.0] == pytest.approx(2.0, rel=0.3)

    def test_prefix_time(self):
        tr = evolve_trail(autonomous(UPPER), ControlSignal.constant(), 10.0)
        lam = polar_exponent(tr, 5.0).flat
        oracle = np.log(np.linalg.svd(expm(5.0 * UPPER), compute_uv=False)) / 5.0
        assert np.allclose(lam, oracle, atol=1e-8)

    def test_long_horizon_no_overflow(self):
        strong = np.diag([4.0, -4.0])
        tr = evolve_trail(autonomous(strong), ControlSignal.constant(), 250.0)
        assert np.allclose(polar_exponent(tr).flat, [4.0, -4.0], atol=1e-5)


class TestAsymptoticRay:
    def test_exact_diag(self):
        samples = [expm(n * DIAG) for n in (10, 20)]
        r = asymptotic_ray(samples, [10, 20])
        assert np.allclose(r.direction, DIAG, atol=1e-12)

    def test_rotations_killed(self):
        rng = np.random.default_rng(1)
        samples = [rotation(rng.uniform(0, 6)) @ expm(n * DIAG) for n in (30, 40)]
        r = asymptotic_ray(samples, [30, 40])
        assert np.allclose(r.direction, DIAG, atol=1e-8)

    def test_conjugated_power_against_high_precision(self):
        g = np.array([[1.0, 2.0], [0.5, 3.0]])
        g /= math.sqrt(np.linalg.det(g))
        n = 200
        oracle = symmetric_power_root(conjugated_power(g, [1.0, -1.0], n), n)
        samples = [g @ expm(k * DIAG) @ np.linalg.inv(g) for k in (n - 1, n)]
        r = asymptotic_ray(samples, [n - 1, n])
        assert np.allclose(r.direction, oracle, atol=1e-8)
        assert r.diagnostic < 1e-3

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            asymptotic_ray([np.eye(2)], [1])
        with pytest.raises(ValueError):
            asymptotic_ray([np.eye(2), np.eye(2)], [2, 1])


class TestOseledets:
    def test_diag_discrete(self):
        d = oseledets_from_matrices(np.diag([2.0, 0.5]), 50)
        assert d.exponents == pytest.approx((math.log(2), -math.log(2)), abs=1e-12)
        assert abs(d.filtration[1][:, 0] @ [0.0, 1.0]) == pytest.approx(1.0, abs=1e-12)

    def test_upper_eigenvector(self):
        d = oseledets_from_matrices(np.array([[2.0, 1.0], [0.0, 0.5]]), 200)
        assert d.exponents == pytest.approx((math.log(2), -math.log(2)), abs=1e-3)
        v = np.array([2.0, -3.0]) / math.sqrt(13)
        angle = math.acos(min(1.0, abs(float(v @ d.filtration[1][:, 0]))))
        assert angle < 1e-2
        assert d.multiplicities == (1, 1)
        assert sum(m * x for m, x in zip(d.multiplicities, d.exponents)) == pytest.approx(0.0, abs=1e-4)

    def test_random_product_against_dense(self):
        rng = np.random.default_rng(5)
        mats = []
        for _ in range(501):
            sign = rng.choice([-1.0, 1.0])
            mats.append(sign * rotation(rng.uniform(0, 2 * math.pi)) @ np.diag([2.0, 0.5]))
        d = oseledets_from_matrices(np.array(mats), 500)
        oracle = np.array(dense_log_singular(mats[:500], dps=400)) / 500
        assert np.allclose(d.raw_exponents, oracle, atol=1e-3)
        assert np.allclose(d.exponents, oracle, atol=1e-3)

    def test_cluster_merging(self):
        d = oseledets_from_matrices(np.diag([2.0, 2.0, 0.25]), 40)
        assert d.multiplicities == (2, 1)
        assert d.filtration[1].shape == (3, 1)

    def test_unresolved(self):
        # a shear transient closes the exponent gap slowly: n = 300 and n = 150 cluster differently
        a = np.array([[1.01, 0.5], [0.0, 1 / 1.01]])
        with pytest.raises(UnresolvedSpectrumError):
            oseledets_from_matrices(a, 300, clustering_gap=0.05)
        assert oseledets_from_matrices(a, 600, clustering_gap=0.05).multiplicities == (2,)

    def test_small_n(self):
        with pytest.raises(ValueError):
            oseledets_from_matrices(np.eye(2), 5)

    def test_from_system(self):
        d = oseledets(autonomous(DIAG), ControlSignal.constant(), 20)
        assert d.exponents == pytest.approx((1.0, -1.0), abs=1e-6)


class TestProjectiveDerivative:
    def test_e1_attracting(self):
        got = projective_derivative_exponent(autonomous(DIAG), ControlSignal.constant(), 0.0, 10.0)
        assert got == pytest.approx(-2.0, abs=1e-6)
        assert finite_difference_projective_exponent(DIAG, 0.0, 10.0) == pytest.approx(got, abs=1e-4)

    def test_e2_repelling(self):
        got = projective_derivative_exponent(autonomous(DIAG), ControlSignal.constant(), math.pi / 2, 10.0)
        assert got == pytest.approx(2.0, abs=1e-6)
        assert finite_difference_projective_exponent(DIAG, math.pi / 2, 5.0, h=1e-8) == pytest.approx(2.0, abs=1e-4)

    def test_rotation(self):
        for x in (0.0, 0.5, 2.0):
            got = projective_derivative_exponent(autonomous(ROT), ControlSignal.constant(), x, 8.0)
            assert got == pytest.approx(0.0, abs=1e-9)

    def test_generic_point_matches_finite_difference(self):
        a = np.array([[0.5, 1.2], [0.3, -0.5]])
        got = projective_derivative_exponent(autonomous(a), ControlSignal.constant(), 0.9, 6.0)
        assert got == pytest.approx(finite_difference_projective_exponent(a, 0.9, 6.0), abs=1e-5)

    def test_needs_sl2(self):
        with pytest.raises(LieError):
            projective_derivative_exponent(autonomous(np.diag([1.0, 0.0, -1.0]), SL3),
                                           ControlSignal.constant(), 0.0, 1.0)


def test_summary_rows():
    tr = evolve_trail(autonomous(DIAG), ControlSignal.constant(), 1.0)
    rows = trail_summary_rows(tr)
    assert len(rows) == len(tr.times) - 1
    assert rows[-1][0] == pytest.approx(1.0)
    assert rows[-1][1:] == pytest.approx([1.0, -1.0, 1.0, -1.0], abs=1e-6)
    path = a_cocycle_path(tr)
    assert path.shape == (len(tr.times), 2)
