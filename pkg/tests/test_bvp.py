"""Boundary residual, Jacobian structure, and the bordered Newton solve."""

import math

import numpy as np
import pytest

from hopfdbc import (BoundaryKinetics, BvpState, ConvergenceError,
                     CubicKinetics, NewtonSettings, PeriodicProfile,
                     amplitude, char_fn, expansion_coefficients,
                     initial_profile, newton_solve, phase, residual)
from hopfdbc.bvp import jacobian
from hopfdbc.spectral import grid

N = 256


class ShiftedEquilibrium(BoundaryKinetics):
    """f = 1 - u + 0.3 g: equilibrium at u* = 1/(1 - 0.3 sigma) != 0."""

    def f(self, u, g, mu):
        return 1.0 - u + 0.3 * g + 0.0 * mu


def asymptotic_state(r, alpha=1.0, beta=1.0, gamma=0.0, n=N):
    co = expansion_coefficients(alpha, beta, gamma)
    prof = initial_profile(r, alpha, beta, gamma, coeffs=co, n=n)
    return BvpState(prof, omega=alpha + co.omega2 * r * r,
                    mu=co.mu2 * r * r), co


class TestResidual:
    def test_zero_profile_zero_residual(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        for mu, omega, sigma in [(0.0, 1.0, 0.0), (0.3, 0.7, 0.2),
                                 (-0.1, 2.0, 0.5)]:
            st = BvpState(PeriodicProfile(np.zeros(N)), omega, mu, sigma)
            assert np.max(np.abs(residual(st, k).values)) <= 1e-14

    def test_zero_deviation_with_shifted_equilibrium(self):
        k = ShiftedEquilibrium()
        st = BvpState(PeriodicProfile(np.zeros(64)), 1.0, 0.0, sigma=0.4)
        assert np.max(np.abs(residual(st, k).values)) <= 1e-12

    def test_absolute_convention_agrees(self):
        from hopfdbc.kinetics import equilibrium
        k = ShiftedEquilibrium()
        sigma = 0.4
        u_star = equilibrium(k, 0.0, sigma)
        v = 0.01 * np.cos(grid(64))
        centered = BvpState(PeriodicProfile(v), 1.0, 0.0, sigma)
        absolute = BvpState(PeriodicProfile(v + u_star), 1.0, 0.0, sigma,
                            centered=False)
        np.testing.assert_allclose(residual(absolute, k).values,
                                   residual(centered, k).values, atol=1e-12)

    def test_kernel_mode_residual_tiny(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        r = 1e-8
        st = BvpState(PeriodicProfile(r * np.cos(grid(N))), omega=1.0, mu=0.0)
        assert np.max(np.abs(residual(st, k).values)) <= 1e-14

    def test_cubic_order_of_asymptotic_guess(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        sups = []
        for r in (0.08, 0.04, 0.02):
            st, _ = asymptotic_state(r)
            sups.append(np.max(np.abs(residual(st, k).values)))
        for big, small in zip(sups, sups[1:]):
            assert 6.0 <= big / small <= 10.0

    def test_third_order_guess_is_closer(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        r = 0.05
        co = expansion_coefficients(1.0, 1.0, 0.0)
        st2, _ = asymptotic_state(r)
        prof3 = initial_profile(r, 1.0, 1.0, 0.0, order=3, coeffs=co, n=N)
        st3 = BvpState(prof3, omega=st2.omega, mu=st2.mu)
        res2 = np.max(np.abs(residual(st2, k).values))
        res3 = np.max(np.abs(residual(st3, k).values))
        assert res3 < 0.25 * res2

    def test_translation_equivariance(self):
        k = CubicKinetics(1.0, 0.8, -0.3)
        rng = np.random.default_rng(1)
        v = 0.05 * np.cos(grid(64)) + 0.01 * rng.standard_normal(64)
        st = BvpState(PeriodicProfile(v), omega=1.1, mu=0.02)
        base = residual(st, k).values
        shift = 5
        st_shift = BvpState(PeriodicProfile(np.roll(v, shift)), omega=1.1,
                            mu=0.02)
        np.testing.assert_allclose(residual(st_shift, k).values,
                                   np.roll(base, shift), atol=1e-12)


class TestPhase:
    def test_cosine_orthogonal(self):
        assert phase(PeriodicProfile(0.4 * np.cos(grid(64)))) == pytest.approx(
            0.0, abs=1e-14)

    def test_sine_integral(self):
        assert phase(PeriodicProfile(0.7 * np.sin(grid(64)))) == pytest.approx(
            0.7 * math.pi, rel=1e-13)

    def test_constant_orthogonal(self):
        assert phase(PeriodicProfile(np.full(64, 2.2))) == pytest.approx(
            0.0, abs=1e-13)


class TestJacobian:
    def test_spectral_diagonal_at_onset(self):
        """At the trivial state the profile block diagonalizes to the
        characteristic function evaluated on the mode lattice."""
        k = CubicKinetics(1.0, 1.0, 0.0)
        n = 64
        st = BvpState(PeriodicProfile(np.zeros(n)), omega=1.0, mu=0.0)
        jac = jacobian(st, k)[:n, :n]
        s = grid(n)
        for ell in (0, 1, 2, 5):
            zc = (jac @ np.cos(ell * s)) + 1j * (jac @ np.sin(ell * s))
            dval = char_fn(k, 1j * ell, 0.0, 0.0)
            np.testing.assert_allclose(
                zc, dval * (np.cos(ell * s) + 1j * np.sin(ell * s)),
                atol=1e-12)

    def test_two_dimensional_kernel_at_onset(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        n = 64
        st = BvpState(PeriodicProfile(np.zeros(n)), omega=1.0, mu=0.0)
        sv = np.linalg.svd(jacobian(st, k)[:n, :n], compute_uv=False)
        assert sv[-1] <= 1e-12
        assert sv[-2] <= 1e-12
        assert sv[-3] > 1e-3

    def test_omega_column_matches_finite_difference(self):
        k = CubicKinetics(1.0, 1.0, 0.5)
        st, _ = asymptotic_state(0.05, gamma=0.5)
        analytic = jacobian(st, k, NewtonSettings(jacobian_mode="analytic"))[:N, N]
        fd = jacobian(st, k, NewtonSettings(jacobian_mode="fd"))[:N, N]
        scale = np.max(np.abs(fd))
        assert np.max(np.abs(analytic - fd)) <= 1e-5 * scale

    def test_phase_row(self):
        k = CubicKinetics(1.0)
        n = 64
        st = BvpState(PeriodicProfile(np.zeros(n)), omega=1.0, mu=0.0)
        jac = jacobian(st, k)
        np.testing.assert_allclose(jac[n, :n], 2 * np.pi / n * np.sin(grid(n)),
                                   atol=1e-15)
        assert jac[n, n] == 0.0


class TestNewtonSolve:
    def test_converges_from_asymptotic_guess(self):
        k = CubicKinetics(1.0, 0.0, 1.0)
        st, _ = asymptotic_state(0.05, beta=0.0, gamma=1.0)
        result = newton_solve(st, k, require_nontrivial=True)
        assert result.iterations <= 6
        assert result.residual_norm <= 1e-10
        assert amplitude(result.state.profile) == pytest.approx(0.05, rel=0.02)

    def test_converges_weakly_subcritical(self):
        # at fixed mu the amplitude differs from the nominal r by roughly
        # |mu4/mu2| r^2, which the small mu2 of (1, 1, 0) amplifies to ~5%
        k = CubicKinetics(1.0, 1.0, 0.0)
        st, _ = asymptotic_state(0.05)
        result = newton_solve(st, k, require_nontrivial=True)
        assert result.iterations <= 6
        assert result.residual_norm <= 1e-10
        assert amplitude(result.state.profile) == pytest.approx(0.05, rel=0.06)

    def test_exact_solution_is_fixed_point(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        st, _ = asymptotic_state(0.05)
        solved = newton_solve(st, k).state
        again = newton_solve(solved, k)
        assert again.iterations == 0

    def test_zero_profile_is_trivial_solution(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        st = BvpState(PeriodicProfile(np.zeros(N)), omega=1.0, mu=0.01)
        result = newton_solve(st, k)
        assert result.iterations == 0
        assert amplitude(result.state.profile) == 0.0

    def test_degenerate_start_rejected(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        st = BvpState(PeriodicProfile(np.zeros(N)), omega=1.0, mu=0.01)
        with pytest.raises(ValueError):
            newton_solve(st, k, require_nontrivial=True)

    def test_max_iter_exhaustion(self):
        k = CubicKinetics(1.0, 0.0, 1.0)
        st, _ = asymptotic_state(0.4, beta=0.0, gamma=1.0)
        with pytest.raises(ConvergenceError):
            newton_solve(st, k, NewtonSettings(residual_tol=1e-15, max_iter=1))

    def test_half_period_antisymmetry_without_quadratic(self):
        k = CubicKinetics(1.0, 0.0, 1.0)
        st, _ = asymptotic_state(0.1, beta=0.0, gamma=1.0)
        solved = newton_solve(st, k, require_nontrivial=True).state
        vals = solved.profile.values
        np.testing.assert_allclose(np.roll(vals, N // 2), -vals, atol=1e-10)

    def test_opposite_amplitude_is_half_period_shift(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        r = 0.05
        st, co = asymptotic_state(r)
        plus = newton_solve(st, k, require_nontrivial=True).state
        flipped = PeriodicProfile(np.roll(st.profile.values, N // 2))
        minus = newton_solve(
            BvpState(flipped, omega=st.omega, mu=st.mu), k,
            require_nontrivial=True).state
        np.testing.assert_allclose(np.roll(minus.profile.values, N // 2),
                                   plus.profile.values, atol=1e-9)
        assert minus.omega == pytest.approx(plus.omega, rel=1e-10)

    def test_fd_jacobian_mode(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        st, _ = asymptotic_state(0.05)
        result = newton_solve(st, k, NewtonSettings(jacobian_mode="fd"),
                              require_nontrivial=True)
        assert result.residual_norm <= 1e-10
