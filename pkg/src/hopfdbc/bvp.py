"""Periodic boundary-value solver for orbit profiles at fixed parameters.

After solving the bulk exactly mode by mode, a periodic orbit is a root of
the nonlocal boundary residual

    R(v) = (omega d/ds) v - f(u* + v, sigma*u* + DtN v, mu)

for the deviation v from the constant equilibrium u*, together with the
phase condition int sin(s) v(s) ds = 0 that removes time translation.
Newton's method solves the bordered (n+1) x (n+1) system in the unknowns
(v at the grid points, omega) with mu held fixed; continuation drives mu
externally.  Nonlinear terms are evaluated on a 2x-refined grid to remove
aliasing of quadratic and cubic products.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError
from .kinetics import BoundaryKinetics, equilibrium
from . import spectral
from .spectral import PeriodicProfile

_MIN_FIRST_MODE = 1e-8


@dataclass(frozen=True)
class NewtonSettings:
    """Tolerances of the bordered Newton solve (sup norms)."""

    residual_tol: float = 1e-10
    max_iter: int = 25
    jacobian_mode: str = "analytic"  # or "fd" for the omega column
    fd_step: float = 1e-7

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.jacobian_mode not in ("analytic", "fd"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


@dataclass(frozen=True)
class BvpState:
    """Orbit candidate: boundary profile, frequency, and parameters.

    ``centered`` marks whether the profile stores the deviation from the
    constant equilibrium (the solver's internal convention) or the
    absolute trace.
    """

    profile: PeriodicProfile
    omega: float
    mu: float
    sigma: float = 0.0
    centered: bool = True

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")


@dataclass(frozen=True)
class NewtonResult:
    state: BvpState
    iterations: int
    residual_norm: float
    phase_residual: float


def as_centered(state: BvpState, k: BoundaryKinetics) -> BvpState:
    """Re-express the profile as the deviation from the equilibrium."""
    if state.centered:
        return state
    u_star = equilibrium(k, state.mu, state.sigma)
    return replace(state, profile=PeriodicProfile(state.profile.values - u_star),
                   centered=True)


def residual(state: BvpState, k: BoundaryKinetics) -> PeriodicProfile:
    """Grid samples of the boundary residual at the given state."""
    state = as_centered(state, k)
    v = state.profile.values
    u_star = equilibrium(k, state.mu, state.sigma)
    flux = spectral.apply_dtn(state.omega, state.sigma, state.profile).values
    f_vals = spectral.dealiased_pointwise(
        v, lambda vf, gf: k.f(u_star + vf, state.sigma * u_star + gf, state.mu),
        flux)
    dv = spectral.apply_time_derivative(state.omega, state.profile).values
    return PeriodicProfile(dv - f_vals)


def phase(p: PeriodicProfile) -> float:
    """Quadrature of int_0^{2pi} sin(s) p(s) ds, exact for grid spectra."""
    return float(2.0 * np.pi / p.n * np.sin(p.s) @ p.values)


def _domega_column(state: BvpState, k: BoundaryKinetics,
                   settings: NewtonSettings) -> np.ndarray:
    """d(residual)/d(omega) at fixed profile and mu."""
    if settings.jacobian_mode == "fd":
        h = settings.fd_step * max(1.0, state.omega)
        rp = residual(replace(state, omega=state.omega + h), k).values
        rm = residual(replace(state, omega=state.omega - h), k).values
        return (rp - rm) / (2.0 * h)
    n = state.profile.n
    v = state.profile.values
    u_star = equilibrium(k, state.mu, state.sigma)
    flux = spectral.apply_dtn(state.omega, state.sigma, state.profile).values
    _, d2, _ = k.partials(u_star + v, state.sigma * u_star + flux, state.mu)
    ell = np.arange(n // 2 + 1)
    dv_sym = spectral.apply_half_symbol(v, 1j * ell)
    dflux = spectral.apply_half_symbol(
        v, spectral.dtn_symbol_domega(state.omega, state.sigma, n))
    return dv_sym - np.asarray(d2) * dflux


def jacobian(state: BvpState, k: BoundaryKinetics,
             settings: NewtonSettings | None = None) -> np.ndarray:
    """Dense (n+1) x (n+1) matrix of (residual, phase) in (v, omega).

    The profile block is the pointwise linearization: the time-derivative
    multiplier minus diag(d1 f) minus diag(d2 f) composed with the
    Dirichlet-to-Neumann multiplier, both realized as circulant matrices.
    Row n+1 is the phase gradient; its omega entry is zero.
    """
    settings = settings or NewtonSettings()
    state = as_centered(state, k)
    n = state.profile.n
    v = state.profile.values
    u_star = equilibrium(k, state.mu, state.sigma)
    flux = spectral.apply_dtn(state.omega, state.sigma, state.profile).values
    d1, d2, _ = k.partials(u_star + v, state.sigma * u_star + flux, state.mu)
    d1 = np.broadcast_to(np.asarray(d1, dtype=float), (n,))
    d2 = np.broadcast_to(np.asarray(d2, dtype=float), (n,))

    m_dot = spectral.operator_matrix(
        lambda w: spectral.apply_half_symbol(
            w, spectral.time_derivative_symbol(state.omega, n)), n)
    m_dtn = spectral.operator_matrix(
        lambda w: spectral.apply_half_symbol(
            w, spectral.dtn_symbol(state.omega, state.sigma, n)), n)

    jac = np.zeros((n + 1, n + 1))
    jac[:n, :n] = m_dot - np.diag(d1) - d2[:, None] * m_dtn
    jac[:n, n] = _domega_column(state, k, settings)
    jac[n, :n] = 2.0 * np.pi / n * np.sin(state.profile.s)
    return jac


def newton_solve(initial: BvpState, k: BoundaryKinetics,
                 settings: NewtonSettings | None = None,
                 require_nontrivial: bool = False) -> NewtonResult:
    """Solve the bordered system for (profile, omega) at fixed (mu, sigma).

    Convergence means both the residual sup norm and the phase value fall
    below ``settings.residual_tol``; an already-converged initial state
    returns after zero iterations.  With ``require_nontrivial`` the solve
    refuses initial guesses whose first Fourier mode is too small for the
    phase condition to pin the time shift.

    Raises
    ------
    ValueError
        Degenerate initial guess when a nontrivial orbit is requested.
    ConvergenceError
        Iteration cap exceeded, or a singular Jacobian (fold or symmetry
        degeneracy), or the frequency left the admissible range.
    """
    settings = settings or NewtonSettings()
    state = as_centered(initial, k)
    if require_nontrivial and abs(state.profile.half_spectrum[1]) < _MIN_FIRST_MODE:
        raise ValueError("initial guess has a vanishing first Fourier mode; "
                         "the phase condition cannot pin the time shift")
    n = state.profile.n
    for it in range(settings.max_iter + 1):
        res = residual(state, k).values
        ph = phase(state.profile)
        res_norm = float(np.max(np.abs(res)))
        if res_norm <= settings.residual_tol and abs(ph) <= settings.residual_tol:
            return NewtonResult(state=state, iterations=it,
                                residual_norm=res_norm, phase_residual=ph)
        if it == settings.max_iter:
            break
        jac = jacobian(state, k, settings)
        rhs = -np.concatenate([res, [ph]])
        try:
            delta = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(
                "singular Jacobian (fold or symmetry degeneracy)") from exc
        if not np.all(np.isfinite(delta)):
            raise ConvergenceError("Newton update is not finite")
        omega_new = state.omega + float(delta[n])
        if omega_new <= 0:
            raise ConvergenceError(
                f"Newton left the admissible range (omega={omega_new})")
        state = replace(state, profile=PeriodicProfile(
            state.profile.values + delta[:n]), omega=omega_new)
    raise ConvergenceError(
        f"no convergence after {settings.max_iter} iterations "
        f"(residual {res_norm:.3e}, phase {ph:.3e})")
