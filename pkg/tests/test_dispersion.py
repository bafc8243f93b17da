"""Characteristic function, Hopf location, and crossing checks."""

import cmath
import math

import numpy as np
import pytest

from hopfdbc import (BoundaryKinetics, BranchCutError, ConvergenceError,
                     CubicKinetics, HopfPoint, char_fn, check_assumptions,
                     find_hopf)
from hopfdbc.dispersion import char_fn_dlambda, char_fn_dmu, track_root

SQRT2 = math.sqrt(2.0)


class Decoupled(BoundaryKinetics):
    """No flux dependence: the characteristic function is lam - d1."""

    def f(self, u, g, mu):
        return -u + 0.0 * g


class TestCharFn:
    def test_at_origin(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        assert char_fn(k, 0.0, 0.0, 0.0) == pytest.approx(1.0)

    def test_critical_root(self):
        k = CubicKinetics(1.0)
        assert abs(char_fn(k, 1j, 0.0, 0.0)) <= 1e-14

    def test_second_harmonic_value(self):
        k = CubicKinetics(1.0)
        expected = (1.0 - SQRT2) + (2.0 - SQRT2) * 1j
        assert char_fn(k, 2j, 0.0, 0.0) == pytest.approx(expected, abs=1e-14)

    def test_branch_cut_raises(self):
        k = CubicKinetics(1.0)
        with pytest.raises(BranchCutError):
            char_fn(k, -1.0, 0.0, 0.0)
        with pytest.raises(BranchCutError):
            char_fn(k, -2.0, 0.0, sigma=1.0)
        # strictly inside the resolvent set despite negative real part
        char_fn(k, -0.5, 0.0, sigma=1.0)

    def test_conjugate_symmetry(self):
        k = CubicKinetics(1.3, 0.5, -0.2)
        for lam in (0.3 + 0.7j, -0.1 + 2.0j, 1.5 - 0.4j):
            assert char_fn(k, np.conj(lam), 0.1, 0.2) == pytest.approx(
                np.conj(char_fn(k, lam, 0.1, 0.2)), rel=1e-13)

    def test_dlambda_matches_finite_difference(self):
        k = CubicKinetics(1.0, 1.0, 0.5)
        lam = 0.2 + 1.1j
        h = 1e-7
        fd = (char_fn(k, lam + h, 0.1) - char_fn(k, lam - h, 0.1)) / (2 * h)
        assert char_fn_dlambda(k, lam, 0.1) == pytest.approx(fd, rel=1e-6)

    def test_dmu_for_cubic_is_minus_sqrt(self):
        k = CubicKinetics(1.0)
        lam = 1j
        assert char_fn_dmu(k, lam, 0.0, 0.0) == pytest.approx(
            -cmath.sqrt(lam), abs=1e-9)


class TestFindHopf:
    def test_reference_point(self):
        hp = find_hopf(CubicKinetics(1.0), 0.0)
        assert hp.omega_star == pytest.approx(1.0, abs=1e-12)
        assert hp.mu_star == pytest.approx(0.0, abs=1e-12)
        assert abs(char_fn(CubicKinetics(1.0), 1j * hp.omega_star,
                           hp.mu_star, 0.0)) <= 1e-10

    def test_with_degradation(self):
        hp = find_hopf(CubicKinetics(1.0), 0.5)
        assert hp.omega_star == pytest.approx(math.sqrt(0.5), abs=1e-12)
        assert hp.mu_star == pytest.approx(0.0, abs=1e-12)

    def test_crossing_rate(self):
        hp = find_hopf(CubicKinetics(1.0), 0.0)
        assert hp.crossing == pytest.approx(SQRT2, abs=1e-8)
        # closed form i*alpha / (sqrt(i*alpha) - sqrt(alpha/2)) at alpha = 1
        closed = (1j / (cmath.sqrt(1j) - math.sqrt(0.5))).real
        assert hp.crossing == pytest.approx(closed, abs=1e-8)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 4.0])
    def test_crossing_positive(self, alpha):
        hp = find_hopf(CubicKinetics(alpha), 0.0)
        assert hp.omega_star == pytest.approx(alpha, rel=1e-10)
        assert hp.crossing > 0

    def test_scan_seeding_away_from_unity(self):
        hp = find_hopf(CubicKinetics(2.0), 0.0)
        assert hp.omega_star == pytest.approx(2.0, rel=1e-12)

    def test_no_hopf_when_overdamped(self):
        # alpha < 2*sigma^2 leaves no imaginary root
        with pytest.raises(ConvergenceError):
            find_hopf(CubicKinetics(1.0), 0.8)

    def test_root_family_derivative(self):
        """d lam/d mu along the tracked root matches -dmu/dlambda."""
        k = CubicKinetics(1.0, 0.7, 0.3)
        hp = find_hopf(k, 0.0)
        h = 1e-6
        lam_p = track_root(k, h, 0.0, 1j * hp.omega_star)
        lam_m = track_root(k, -h, 0.0, 1j * hp.omega_star)
        fd = (lam_p - lam_m) / (2 * h)
        predicted = -hp.d_mu / hp.d_lambda
        assert abs(fd - predicted) / abs(predicted) <= 1e-6


class TestCheckAssumptions:
    def test_reference_point_passes(self):
        k = CubicKinetics(1.0)
        report = check_assumptions(find_hopf(k, 0.0), k)
        assert report.all_ok
        assert report.root_residual <= 1e-10
        assert report.offcritical_min > 1e-6

    def test_degradation_passes(self):
        k = CubicKinetics(1.0)
        report = check_assumptions(find_hopf(k, 0.3), k)
        assert report.all_ok

    def test_decoupled_kinetics_fail_root_check(self):
        k = Decoupled()
        fake = HopfPoint(omega_star=1.0, mu_star=0.0, sigma_star=0.0,
                         u_star=0.0, d_lambda=1.0 + 0j, d_mu=0.0j,
                         crossing=0.0)
        report = check_assumptions(fake, k)
        assert not report.root_ok
        assert not report.all_ok
