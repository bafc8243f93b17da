"""Reduced closed-form stability and the numeric Floquet solver."""

import math

import numpy as np
import pytest

from hopfdbc import (CubicKinetics, FloquetResult, classify,
                     expansion_coefficients, find_hopf, floquet_numeric,
                     gamma_crit, initial_profile, leading_eigenvalue,
                     mu2_omega2, newton_solve, reduced_coeffs)
from hopfdbc.bvp import BvpState
from hopfdbc.continuation import BranchPoint, _make_point
from hopfdbc.stability import floquet_matrix, translation_residual

SQRT2 = math.sqrt(2.0)
N = 256


def converged_orbit(alpha, beta, gamma, r, n=N):
    k = CubicKinetics(alpha, beta, gamma)
    co = expansion_coefficients(alpha, beta, gamma)
    prof = initial_profile(r, alpha, beta, gamma, coeffs=co, n=n)
    st = BvpState(prof, omega=alpha + co.omega2 * r * r, mu=co.mu2 * r * r)
    result = newton_solve(st, k, require_nontrivial=True)
    return _make_point(result, k), k


class TestReducedCoeffs:
    def test_b_entry(self):
        assert reduced_coeffs(1.0, 0.0, 1.0).b == pytest.approx(0.5 + 0.5j)
        assert reduced_coeffs(2.5, 1.0, 0.0).b == pytest.approx(
            2.5 * (0.5 + 0.5j))

    def test_a_equals_c(self):
        rc = reduced_coeffs(1.3, 0.8, -0.4)
        assert rc.a == rc.c

    def test_pure_cubic_entry(self):
        rc = reduced_coeffs(1.0, 0.0, 1.0)
        assert rc.a == pytest.approx(-0.75 + 0j, abs=1e-14)
        assert rc.d == pytest.approx(0.0, abs=1e-14)

    def test_pure_quadratic_entry(self):
        rc = reduced_coeffs(1.0, 1.0, 0.0)
        assert rc.a == pytest.approx(-0.59763 + 0.56904j, abs=1e-5)

    @pytest.mark.parametrize("params", [(1.0, 1.0, 0.0), (1.0, 0.0, 1.0),
                                        (2.0, 1.5, -0.3), (0.7, 0.4, 0.2)])
    def test_a_is_negated_branching_numerator(self, params):
        """Cross-module consistency: a equals -M from the branch expansion."""
        rc = reduced_coeffs(*params)
        co = expansion_coefficients(*params)
        assert rc.a == pytest.approx(-co.bigM, rel=1e-12)


class TestLeadingEigenvalue:
    def test_reference_values(self):
        assert leading_eigenvalue(reduced_coeffs(1, 0, 1)) == pytest.approx(1.5)
        assert leading_eigenvalue(reduced_coeffs(1, 0, -1)) == pytest.approx(-1.5)
        assert leading_eigenvalue(reduced_coeffs(1, 1, 0)) == pytest.approx(
            0.0572, abs=1e-3)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("offset", [-0.05, -0.02, 0.02, 0.05])
    def test_sign_law_straddling_criticality(self, beta, offset):
        gamma = gamma_crit(1.0, beta) + offset
        mu2 = mu2_omega2(1.0, beta, gamma)[0]
        lam = leading_eigenvalue(reduced_coeffs(1.0, beta, gamma))
        assert lam * mu2 < 0


class TestFloquetMatrix:
    def test_trivial_orbit_diagonal(self):
        """At zero amplitude the operator is the characteristic function
        evaluated at alpha*(i*ell + lam)."""
        from hopfdbc import char_fn
        k = CubicKinetics(1.0, 1.0, 0.5)
        trivial = BranchPoint(mu=0.0, omega=1.0, r=0.0, u_inf=0.0,
                              profile=initial_profile(0.0, 1.0, 1.0, 0.5, n=64))
        n_modes = 8
        for lam in (0.0, 0.03 + 0.01j):
            rho = np.sqrt(complex(lam))
            mat = floquet_matrix(trivial, k, rho, n_modes)
            off = mat - np.diag(np.diag(mat))
            assert np.max(np.abs(off)) <= 1e-14
            for i, ell in enumerate(range(-n_modes, n_modes + 1)):
                want = char_fn(k, 1.0 * (1j * ell + lam))
                assert mat[i, i] == pytest.approx(want, abs=1e-12)

    def test_translation_mode_in_kernel(self):
        pt, k = converged_orbit(1.0, 0.0, 1.0, 0.05)
        assert translation_residual(pt, k, 64) <= 1e-8


@pytest.fixture(scope="module")
def unstable_floquet():
    pt, k = converged_orbit(1.0, 0.0, 1.0, 0.05)
    return pt, k, floquet_numeric(pt, k, truncation=64)


class TestFloquetNumeric:
    def test_matches_closed_form(self, unstable_floquet):
        pt, _, result = unstable_floquet
        closed = 1.5 * pt.r ** 2
        nonzero = [z for z in result.exponents if abs(z) > 1e-8]
        assert len(nonzero) >= 1
        lead = max(nonzero, key=lambda z: z.real)
        assert lead.real == pytest.approx(closed, rel=0.1)
        assert abs(lead.imag) <= 1e-10
        assert result.translation_residual <= 1e-8

    def test_contains_translation_root(self, unstable_floquet):
        result = unstable_floquet[2]
        assert any(abs(z) <= 1e-8 for z in result.exponents)

    def test_conjugate_pairing(self, unstable_floquet):
        result = unstable_floquet[2]
        for z in result.exponents:
            partner = min(abs(np.conj(z) - w) for w in result.exponents)
            assert partner <= 1e-8

    def test_stable_side(self):
        pt, k = converged_orbit(1.0, 0.0, -1.0, 0.05)
        result = floquet_numeric(pt, k, truncation=64)
        closed = -1.5 * pt.r ** 2
        nonzero = [z for z in result.exponents if abs(z) > 1e-8]
        lead = min(nonzero, key=lambda z: abs(z - closed))
        assert lead.real == pytest.approx(closed, rel=0.1)

    def test_missing_profile_rejected(self):
        bare = BranchPoint(mu=0.0, omega=1.0, r=0.05, u_inf=0.0, profile=None)
        with pytest.raises(ValueError):
            floquet_numeric(bare, CubicKinetics(1.0), truncation=16)


class TestClassify:
    def test_closed_form_signs(self):
        stable_pt = BranchPoint(mu=0.01, omega=1.0, r=0.05, u_inf=0.0,
                                profile=None)
        verdict, lam = classify(stable_pt, CubicKinetics(1.0, 0.0, -1.0))
        assert verdict == "stable"
        assert lam == pytest.approx(-1.5 * 0.05 ** 2, rel=1e-10)
        verdict, lam = classify(stable_pt, CubicKinetics(1.0, 0.0, 1.0))
        assert verdict == "unstable"

    def test_below_resolution_unknown(self):
        tiny = BranchPoint(mu=0.0, omega=1.0, r=1e-6, u_inf=0.0, profile=None)
        verdict, _ = classify(tiny, CubicKinetics(1.0, 0.0, 1.0))
        assert verdict == "unknown"

    def test_degradation_defers_to_branching_direction(self):
        pt = BranchPoint(mu=0.01, omega=1.0, r=0.05, u_inf=0.0, profile=None)
        verdict, _ = classify(pt, CubicKinetics(1.0, 0.0, -1.0),
                              sigma=0.3)
        assert verdict == "stable"
        verdict, _ = classify(pt, CubicKinetics(1.0, 0.0, 1.0), sigma=0.3)
        assert verdict == "unstable"

    def test_numeric_path(self):
        pt = BranchPoint(mu=0.0, omega=1.0, r=0.05, u_inf=0.0, profile=None)
        result = FloquetResult(exponents=(0.0 + 0j, -3.7e-3 + 0j),
                               method="numeric", truncation=64)
        verdict, lam = classify(pt, CubicKinetics(1.0), method="numeric",
                                floquet=result)
        assert verdict == "stable"
        assert lam == pytest.approx(-3.7e-3)
        with pytest.raises(ValueError):
            classify(pt, CubicKinetics(1.0), method="numeric")
