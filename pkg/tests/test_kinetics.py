"""Boundary kinetics: evaluation, analytic partials, equilibria."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopfdbc import BoundaryKinetics, ConvergenceError, CubicKinetics, equilibrium

SQRT2 = math.sqrt(2.0)


class FluxFreeDecay(BoundaryKinetics):
    """f = 1 - u, no flux dependence, root at u = 1; exercises FD partials."""

    def f(self, u, g, mu):
        return 1.0 - u + 0.0 * g


class Rootless(BoundaryKinetics):
    """f = 1 + u^2 has no real equilibrium."""

    def f(self, u, g, mu):
        return 1.0 + u * u + 0.0 * g


class TestEvalF:
    def test_trivial_equilibrium(self):
        k = CubicKinetics(1.0, 1.0, 0.0)
        assert k.f(0.0, 0.0, 0.3) == 0.0

    def test_linear_term_only(self):
        k = CubicKinetics(1.0, 0.0, 0.0)
        assert k.f(2.0, 0.0, 0.0) == -2.0

    def test_full_cubic_value(self):
        k = CubicKinetics(1.0, 1.0, 1.0)
        assert k.f(1.0, 1.0, 0.0) == pytest.approx(1.0 + SQRT2, abs=1e-14)

    def test_vectorized(self):
        k = CubicKinetics(1.0, 1.0, 1.0)
        u = np.array([0.0, 1.0, -1.0])
        g = np.array([0.0, 1.0, 0.5])
        vals = k.f(u, g, 0.0)
        assert vals.shape == (3,)
        assert vals[1] == pytest.approx(1.0 + SQRT2)

    def test_odd_symmetry_without_quadratic(self):
        k = CubicKinetics(1.3, 0.0, -0.7)
        for u, g in [(0.4, 0.2), (-1.1, 0.9), (2.0, -0.3)]:
            assert k.f(-u, -g, 0.15) == pytest.approx(-k.f(u, g, 0.15), rel=1e-14)

    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            CubicKinetics(0.0)
        with pytest.raises(ValueError):
            CubicKinetics(-1.0)


class TestPartials:
    def test_at_origin(self):
        d1, d2, dmu = CubicKinetics(1.0, 1.0, 0.0).partials(0.0, 0.0, 0.0)
        assert d1 == pytest.approx(-1.0)
        assert d2 == pytest.approx(SQRT2)
        assert dmu == pytest.approx(0.0)

    def test_cubic_slope(self):
        d1, d2, dmu = CubicKinetics(1.0, 0.0, 1.0).partials(1.0, 0.0, 0.0)
        assert d1 == pytest.approx(2.0)
        assert d2 == pytest.approx(SQRT2)
        assert dmu == pytest.approx(0.0)

    @given(alpha=st.floats(0.2, 4.0), beta=st.floats(-2.0, 2.0),
           gamma=st.floats(-2.0, 2.0), u=st.floats(-1.5, 1.5),
           g=st.floats(-1.5, 1.5), mu=st.floats(-0.5, 0.5))
    @settings(max_examples=60, deadline=None)
    def test_matches_finite_differences(self, alpha, beta, gamma, u, g, mu):
        k = CubicKinetics(alpha, beta, gamma)
        analytic = k.partials(u, g, mu)
        fd = BoundaryKinetics.partials(k, u, g, mu)
        for a, b in zip(analytic, fd):
            assert a == pytest.approx(b, abs=1e-6)

    def test_fd_error_is_second_order(self):
        k = CubicKinetics(1.0, 1.0, 1.0)
        exact = k.partials(0.7, 0.3, 0.1)[0]

        def fd_d1(h):
            return (k.f(0.7 + h, 0.3, 0.1) - k.f(0.7 - h, 0.3, 0.1)) / (2 * h)

        e1 = abs(fd_d1(1e-3) - exact)
        e2 = abs(fd_d1(5e-4) - exact)
        assert 3.0 < e1 / e2 < 5.0


class TestEquilibrium:
    def test_trivial_root_any_parameters(self):
        for ab in [(1.0, 1.0, 1.0), (0.5, -2.0, 3.0), (2.0, 0.0, -1.0)]:
            k = CubicKinetics(*ab)
            assert equilibrium(k, 0.3, 0.4, guess=0.0) == 0.0

    def test_linear_homogeneous_root(self):
        k = CubicKinetics(1.0, 0.0, 0.0)
        u = equilibrium(k, 0.0, 1.0, guess=0.1)
        assert abs(k.f(u, u, 0.0)) <= 1e-12

    def test_flux_free_kinetics(self):
        u = equilibrium(FluxFreeDecay(), 0.0, 0.0, guess=0.3)
        assert u == pytest.approx(1.0, abs=1e-12)

    def test_residual_tolerance(self):
        k = CubicKinetics(1.0, 2.0, -1.0)
        u = equilibrium(k, 0.2, 0.3, guess=0.4)
        assert abs(k.f(u, 0.3 * u, 0.2)) <= 1e-12

    def test_no_root_raises(self):
        with pytest.raises(ConvergenceError):
            equilibrium(Rootless(), 0.0, 0.0, guess=0.5)
