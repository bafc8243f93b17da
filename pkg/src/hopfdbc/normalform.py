"""Expansion of the bifurcating periodic-orbit branch for cubic kinetics.

Along the branch, parameter, frequency, and far-field constant expand in
the first-mode amplitude r as

    mu    = mu2 * r^2 + O(r^4),
    omega = omega_star + omega2 * r^2 + O(r^4),
    u_inf = uinf2 * r^2 + O(r^4),

with coefficients determined by the characteristic function at the modes
0, 1, 2 of the critical frequency.  Writing lam_ell = char(i*omega_star*
ell; 0, sigma), the second-order profile coefficients are v20 = beta/
(2*lam_0) and v22 = beta/(4*lam_2), and (mu2, omega2) solve the complex
linear equation

    (d char/d mu) * mu2 + i*(d char/d lam) * omega2 = M,
    M = beta^2*(1/lam_0 + 1/(2*lam_2)) + (3/4)*gamma,

as a real 2x2 system.  At sigma = 0 everything collapses to closed forms,
which double as the binding consistency check for all sign conventions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dispersion import HopfPoint
from .spectral import PeriodicProfile, grid

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ExpansionCoefficients:
    """All branch-expansion data for one cubic parameter set."""

    alpha: float
    beta: float
    gamma: float
    sigma: float
    omega_star: float
    lambda0: complex
    lambda2: complex
    lambda1_mu: complex
    lambda1_omega: complex
    v20: float
    v22: complex
    bigM: complex
    mu2: float
    omega2: float
    uinf2: float
    gamma_crit: float


def hopf_frequency(alpha: float, sigma: float = 0.0) -> float:
    """Critical frequency sqrt(alpha*(alpha - 2*sigma^2)).

    Raises
    ------
    ValueError
        If alpha <= 2*sigma^2 (no oscillatory instability).
    """
    if alpha <= 2.0 * sigma * sigma:
        raise ValueError(
            f"no Hopf point: alpha={alpha} <= 2*sigma^2={2 * sigma * sigma}")
    return math.sqrt(alpha * (alpha - 2.0 * sigma * sigma))


def _char_cubic(alpha: float, lam: complex, sigma: float) -> complex:
    """Characteristic function of the cubic family at mu = 0, exact."""
    return lam + alpha - math.sqrt(2.0 * alpha) * cmath.sqrt(lam + sigma * sigma)


def lambda_coeffs(alpha: float, sigma: float = 0.0,
                  hopf: HopfPoint | None = None
                  ) -> tuple[complex, complex, complex, complex]:
    """(lam_0, lam_2, lam_1_mu, lam_1_omega) of the cubic family.

    lam_ell is the characteristic function at i*omega_star*ell; lam_1_mu
    and lam_1_omega are its mu- and omega-derivatives at the critical root,
    evaluated analytically (the equilibrium is identically zero, so the
    mu-derivative carries no equilibrium drift).
    """
    w = hopf.omega_star if hopf is not None else hopf_frequency(alpha, sigma)
    root = cmath.sqrt(1j * w + sigma * sigma)
    lam0 = _char_cubic(alpha, 0.0, sigma)
    lam2 = _char_cubic(alpha, 2j * w, sigma)
    lam1_mu = -root
    lam1_omega = 1j * (1.0 - math.sqrt(2.0 * alpha) / (2.0 * root))
    return lam0, lam2, lam1_mu, lam1_omega


def mu2_omega2(alpha: float, beta: float, gamma: float, sigma: float = 0.0
               ) -> tuple[float, float, float]:
    """Branch curvature (mu2, omega2, uinf2) at general degradation.

    Solves the order-r^3 solvability condition as a real 2x2 system; see
    the module docstring.  Reduces to :func:`mu2_omega2_sigma0` at
    sigma = 0 to machine precision.

    Raises
    ------
    ArithmeticError
        If the 2x2 system degenerates (the mu- and omega-derivatives of
        the characteristic function fail to be independent over R).
    """
    lam0, lam2, lmu, lom = lambda_coeffs(alpha, sigma)
    big_m = beta * beta * (1.0 / lam0 + 1.0 / (2.0 * lam2)) + 0.75 * gamma
    mat = np.array([[lmu.real, lom.real],
                    [lmu.imag, lom.imag]])
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    if abs(det) < 1e-12 * max(1.0, abs(lmu) * abs(lom)):
        raise ArithmeticError("degenerate solvability system: "
                              "derivatives linearly dependent over R")
    mu2, omega2 = np.linalg.solve(mat, [big_m.real, big_m.imag])
    uinf2 = (beta / (2.0 * lam0)).real
    return float(mu2), float(omega2), uinf2


def mu2_omega2_sigma0(alpha: float, beta: float, gamma: float
                      ) -> tuple[float, float, float]:
    """Closed-form branch curvature without degradation (sigma = 0)."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    b2a = beta * beta / alpha
    mu2 = (b2a * (1.0 / 3.0 - 1.0 / (2.0 * _SQRT2))
           - 3.0 * gamma / (4.0 * _SQRT2)) / math.sqrt(alpha)
    omega2 = -(7.0 * b2a / 6.0 + 3.0 * gamma / 4.0)
    uinf2 = beta / (2.0 * alpha)
    return mu2, omega2, uinf2


def gamma_crit(alpha: float, beta: float) -> float:
    """Cubic coefficient at which the branching direction flips.

    The bifurcation is supercritical (mu2 > 0) precisely for
    gamma < gamma_crit <= 0.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return (beta * beta / alpha) * (4.0 * _SQRT2 / 9.0 - 2.0 / 3.0)


def expansion_coefficients(alpha: float, beta: float, gamma: float,
                           sigma: float = 0.0) -> ExpansionCoefficients:
    """Assemble every expansion coefficient for one parameter set."""
    lam0, lam2, lmu, lom = lambda_coeffs(alpha, sigma)
    big_m = beta * beta * (1.0 / lam0 + 1.0 / (2.0 * lam2)) + 0.75 * gamma
    mu2, omega2, uinf2 = mu2_omega2(alpha, beta, gamma, sigma)
    return ExpansionCoefficients(
        alpha=alpha, beta=beta, gamma=gamma, sigma=sigma,
        omega_star=hopf_frequency(alpha, sigma),
        lambda0=lam0, lambda2=lam2, lambda1_mu=lmu, lambda1_omega=lom,
        v20=(beta / (2.0 * lam0)).real, v22=beta / (4.0 * lam2),
        bigM=big_m, mu2=mu2, omega2=omega2, uinf2=uinf2,
        gamma_crit=gamma_crit(alpha, beta))


def initial_profile(r: float, alpha: float, beta: float, gamma: float,
                    sigma: float = 0.0, order: int = 2, n: int = 256,
                    coeffs: ExpansionCoefficients | None = None
                    ) -> PeriodicProfile:
    """Asymptotic orbit profile r*cos(s) + higher harmonics.

    ``order`` 1 gives the pure first mode; 2 adds the constant and second
    harmonic r^2*(v20 + 2*Re(v22*e^{2is})); 3 additionally adds the third
    harmonic, whose coefficients are only available at sigma = 0.
    """
    if r < 0:
        raise ValueError(f"amplitude must be nonnegative, got {r}")
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2, or 3, got {order}")
    s = grid(n)
    v = r * np.cos(s)
    if order >= 2:
        if coeffs is None:
            coeffs = expansion_coefficients(alpha, beta, gamma, sigma)
        v = v + r * r * (coeffs.v20 + 2.0 * np.real(coeffs.v22 * np.exp(2j * s)))
    if order == 3:
        if sigma != 0.0:
            raise ValueError("third-order coefficients are only available "
                             "without degradation (sigma = 0)")
        sq2, sq3, sq6 = _SQRT2, math.sqrt(3.0), math.sqrt(6.0)
        b2a = beta * beta / alpha
        c3_cos = -(5.0 + 2.0 * sq2 + sq3) / 48.0 * b2a - (1.0 + sq3) / 32.0 * gamma
        c3_sin = (-(5.0 + 4.0 * sq2 + 3.0 * sq3 + 2.0 * sq6) / 48.0 * b2a
                  + (3.0 + sq3) / 32.0 * gamma)
        v = v + r ** 3 * (c3_cos * np.cos(3.0 * s) + c3_sin * np.sin(3.0 * s))
    return PeriodicProfile(v)
