"""Linear analysis of the coupled boundary-bulk system.

Perturbations e^{lam*t} of a spatially constant equilibrium are bounded
bulk solutions exactly when the scalar characteristic function

    char(lam; mu, sigma) = lam - d1 - d2*sqrt(lam + sigma^2)

vanishes, where d1 = df/du and d2 = df/dg are evaluated at the equilibrium
(u*, sigma*u*, mu) and the square root is principal.  A Hopf point is a
parameter value where a simple conjugate pair of roots crosses the
imaginary axis transversally.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchCutError, ConvergenceError
from .kinetics import BoundaryKinetics, equilibrium

_DMU_STEP = 1e-6


@dataclass(frozen=True)
class HopfPoint:
    """Critical data of an oscillatory instability of the equilibrium.

    ``crossing`` is the rate Re(d lam/d mu) at which the root pair leaves
    the imaginary axis; positive means the equilibrium destabilizes as mu
    increases.
    """

    omega_star: float
    mu_star: float
    sigma_star: float
    u_star: float
    d_lambda: complex
    d_mu: complex
    crossing: float


@dataclass(frozen=True)
class AssumptionReport:
    """Checks that a Hopf point is simple, isolated, and transversal."""

    root_ok: bool
    uniqueness_ok: bool
    simple_ok: bool
    crossing_ok: bool
    root_residual: float
    offcritical_min: float
    d_lambda_abs: float
    crossing: float

    @property
    def all_ok(self) -> bool:
        return (self.root_ok and self.uniqueness_ok
                and self.simple_ok and self.crossing_ok)


def char_fn(k: BoundaryKinetics, lam: complex, mu: float = 0.0,
            sigma: float = 0.0, u_star_guess: float = 0.0) -> complex:
    """Characteristic function at growth rate ``lam``.

    Resolves the equilibrium branch u*(mu, sigma) by scalar Newton from
    ``u_star_guess`` and evaluates lam - d1 - d2*sqrt(lam + sigma^2).

    Raises
    ------
    BranchCutError
        If lam + sigma^2 lies on the negative real axis (the square root's
        branch cut).  The origin itself is admissible, sqrt(0) = 0.
    """
    lam = complex(lam)
    z = lam + sigma * sigma
    if z.imag == 0.0 and z.real < 0.0:
        raise BranchCutError(f"lam + sigma^2 = {z} lies on the branch cut")
    u_star = equilibrium(k, mu, sigma, guess=u_star_guess)
    d1, d2, _ = k.partials(u_star, sigma * u_star, mu)
    return lam - complex(d1) - complex(d2) * cmath.sqrt(z)


def char_fn_dlambda(k: BoundaryKinetics, lam: complex, mu: float = 0.0,
                    sigma: float = 0.0, u_star_guess: float = 0.0) -> complex:
    """d(char)/d(lam); requires lam + sigma^2 off the cut and nonzero."""
    lam = complex(lam)
    z = lam + sigma * sigma
    if z.imag == 0.0 and z.real <= 0.0:
        raise BranchCutError(f"derivative undefined at lam + sigma^2 = {z}")
    u_star = equilibrium(k, mu, sigma, guess=u_star_guess)
    _, d2, _ = k.partials(u_star, sigma * u_star, mu)
    return 1.0 - complex(d2) / (2.0 * cmath.sqrt(z))


def char_fn_dmu(k: BoundaryKinetics, lam: complex, mu: float = 0.0,
                sigma: float = 0.0, u_star_guess: float = 0.0,
                step: float = _DMU_STEP) -> complex:
    """Total mu-derivative of the characteristic function at fixed lam.

    Includes the drift of the equilibrium branch u*(mu, sigma) through the
    coefficients d1, d2; computed by central differencing in mu, seeding
    the perturbed equilibrium solves from the unperturbed root.
    """
    h = step * max(1.0, abs(mu))
    u0 = equilibrium(k, mu, sigma, guess=u_star_guess)
    fp = char_fn(k, lam, mu + h, sigma, u_star_guess=u0)
    fm = char_fn(k, lam, mu - h, sigma, u_star_guess=u0)
    return (fp - fm) / (2.0 * h)


def _char_on_imag_axis(d1: float, d2: float, sigma: float,
                       omegas: np.ndarray) -> np.ndarray:
    """Vectorized |char(i*omega)| for fixed equilibrium coefficients."""
    z = 1j * omegas + sigma * sigma + 0j
    return np.abs(1j * omegas - d1 - d2 * np.sqrt(z))


def _scan_initial(k: BoundaryKinetics, sigma: float, mu0: float = 0.0,
                  n_grid: int = 2000) -> tuple[float, float]:
    """Coarse positive-frequency scan for a root of char(i*omega; mu0)."""
    u0 = equilibrium(k, mu0, sigma)
    d1, d2, _ = k.partials(u0, sigma * u0, mu0)
    scale = 10.0 * max(1.0, abs(float(d1)))
    omegas = np.linspace(scale / n_grid, scale, n_grid)
    vals = _char_on_imag_axis(float(d1), float(d2), sigma, omegas)
    return float(omegas[np.argmin(vals)]), mu0


def find_hopf(k: BoundaryKinetics, sigma: float = 0.0,
              initial: tuple[float, float] | None = None,
              tol: float = 1e-12, max_iter: int = 50) -> HopfPoint:
    """Locate a Hopf point by a 2x2 Newton iteration in (omega, mu).

    Solves Re char(i*omega; mu, sigma) = Im char(i*omega; mu, sigma) = 0.
    Without an ``initial`` guess, seeds from a frequency scan at mu = 0.

    Raises
    ------
    ConvergenceError
        On Newton divergence or a nonpositive frequency at convergence
        (no oscillatory instability nearby).
    """
    if initial is None:
        omega, mu = _scan_initial(k, sigma)
    else:
        omega, mu = float(initial[0]), float(initial[1])
    u_guess = 0.0
    for _ in range(max_iter):
        try:
            u_guess = equilibrium(k, mu, sigma, guess=u_guess)
            val = char_fn(k, 1j * omega, mu, sigma, u_star_guess=u_guess)
        except BranchCutError as exc:
            raise ConvergenceError(f"Hopf Newton left the domain: {exc}") from exc
        if abs(val) <= tol:
            break
        dl = char_fn_dlambda(k, 1j * omega, mu, sigma, u_star_guess=u_guess)
        dm = char_fn_dmu(k, 1j * omega, mu, sigma, u_star_guess=u_guess)
        domega = 1j * dl
        jac = np.array([[domega.real, dm.real],
                        [domega.imag, dm.imag]])
        try:
            delta = np.linalg.solve(jac, [-val.real, -val.imag])
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Jacobian in Hopf Newton") from exc
        omega += delta[0]
        mu += delta[1]
        if not (math.isfinite(omega) and math.isfinite(mu)):
            raise ConvergenceError("Hopf Newton diverged")
    else:
        raise ConvergenceError(
            f"Hopf Newton did not converge after {max_iter} iterations "
            f"(sigma={sigma}, last residual {abs(val):.3e})")
    if omega <= 0:
        raise ConvergenceError(
            f"Hopf Newton converged to nonpositive frequency {omega}")
    u_star = equilibrium(k, mu, sigma, guess=u_guess)
    d_lambda = char_fn_dlambda(k, 1j * omega, mu, sigma, u_star_guess=u_star)
    d_mu = char_fn_dmu(k, 1j * omega, mu, sigma, u_star_guess=u_star)
    crossing = (-d_mu / d_lambda).real
    return HopfPoint(omega_star=omega, mu_star=mu, sigma_star=sigma,
                     u_star=u_star, d_lambda=d_lambda, d_mu=d_mu,
                     crossing=crossing)


def track_root(k: BoundaryKinetics, mu: float, sigma: float,
               lam_guess: complex, tol: float = 1e-13,
               max_iter: int = 50) -> complex:
    """Follow a single root of the characteristic function to parameter mu."""
    lam = complex(lam_guess)
    u_guess = 0.0
    for _ in range(max_iter):
        u_guess = equilibrium(k, mu, sigma, guess=u_guess)
        val = char_fn(k, lam, mu, sigma, u_star_guess=u_guess)
        if abs(val) <= tol:
            return lam
        dl = char_fn_dlambda(k, lam, mu, sigma, u_star_guess=u_guess)
        lam -= val / dl
    raise ConvergenceError(f"root tracking stalled at mu={mu}")


def _growth_threshold(d1: float, d2: float, sigma: float) -> float:
    """Smallest W such that |char(i*omega)| >= |omega|/2 for all |omega| >= W.

    From the triangle inequality, |omega|/2 >= |d1| + |d2|*sqrt(|omega| +
    sigma^2) suffices, and the left-over margin is increasing once
    sqrt(|omega| + sigma^2) >= |d2|.
    """
    a, b = abs(d1), abs(d2)
    if b == 0.0:
        return 2.0 * a
    # positive root of omega^2/4 - (a + b^2)*omega + (a^2 - b^2 sigma^2) = 0
    p = a + b * b
    disc = max(p * p - (a * a - b * b * sigma * sigma), 0.0)
    root = 2.0 * (p + math.sqrt(disc))
    return max(root, b * b - sigma * sigma, 0.0)


def check_assumptions(h: HopfPoint, k: BoundaryKinetics,
                      omega_max: float | None = None,
                      step: float | None = None,
                      exclusion: float | None = None,
                      margin: float = 1e-6,
                      root_tol: float = 1e-10,
                      simple_tol: float = 1e-8) -> AssumptionReport:
    """Verify that a Hopf point is a simple, isolated, transversal crossing.

    Three numerical checks: the root residual |char(i*omega*)|; absence of
    other imaginary-axis roots, via a grid scan of |omega| <= omega_max
    (excluding a neighborhood of +-omega*) combined with the growth bound
    |char(i*omega)| >= |omega|/2 at large frequency; and simplicity
    |d char/d lam| > tol.  Transversality of the crossing is reported as a
    fourth flag.  Failures are carried in the report, never raised.
    """
    w = h.omega_star
    omega_max = 10.0 * w if omega_max is None else omega_max
    step = w / 200.0 if step is None else step
    exclusion = w / 20.0 if exclusion is None else exclusion

    d1, d2, _ = k.partials(h.u_star, h.sigma_star * h.u_star, h.mu_star)
    d1, d2 = float(d1), float(d2)

    residual = float(_char_on_imag_axis(d1, d2, h.sigma_star, np.array([w]))[0])
    root_ok = residual <= root_tol

    omegas = np.arange(-omega_max, omega_max + step / 2, step)
    mask = (np.abs(omegas - w) > exclusion) & (np.abs(omegas + w) > exclusion)
    vals = _char_on_imag_axis(d1, d2, h.sigma_star, omegas[mask])
    offcritical_min = float(np.min(vals)) if vals.size else math.inf
    scan_ok = offcritical_min > margin

    big = _growth_threshold(d1, d2, h.sigma_star)
    growth_ok = True
    if big > omega_max:
        # bridge the band where the triangle-inequality bound is not yet active
        band = np.arange(omega_max, big + step, step)
        band_vals = _char_on_imag_axis(d1, d2, h.sigma_star, band)
        growth_ok = bool(np.all(band_vals >= band / 2.0))
    uniqueness_ok = scan_ok and growth_ok

    d_lambda_abs = abs(h.d_lambda)
    simple_ok = d_lambda_abs > simple_tol
    crossing_ok = abs(h.crossing) > simple_tol

    return AssumptionReport(root_ok=root_ok, uniqueness_ok=uniqueness_ok,
                            simple_ok=simple_ok, crossing_ok=crossing_ok,
                            root_residual=residual,
                            offcritical_min=offcritical_min,
                            d_lambda_abs=d_lambda_abs, crossing=h.crossing)
