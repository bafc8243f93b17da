"""Floquet spectral stability of the bifurcating orbits.

Perturbations e^{lam*s} v(s) of an orbit satisfy a linear nonlocal
boundary-value problem whose Dirichlet-to-Neumann symbol carries the
exponent: sqrt(omega*(i*ell + lam)) on nonzero modes and
sqrt(omega)*sqrt(lam) on the mean mode.  Near onset the problem reduces to
a 2x2 matrix in the critical mode pair with closed-form entries (cubic
kinetics, no degradation); the leading nonzero exponent is

    lam = -2*Re(a*conj(b)) / |b|^2 * r^2 + O(r^3).

The general path assembles the truncated operator in Fourier space as an
analytic function of rho = sqrt(lam) (the substitution that removes the
square-root nonsmoothness at the essential-spectrum edge) and finds
exponents where its smallest singular value vanishes, by grid scan plus
bordered-Newton refinement.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import TruncationError
from .kinetics import CubicKinetics
from . import spectral
from .continuation import BranchPoint

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ReducedCoeffs:
    """Entries of the reduced critical-mode eigenvalue matrix at order
    (r^2, lam, sqrt(lam)*r^2)."""

    a: complex
    b: complex
    c: complex
    d: complex
    alpha: float
    beta: float
    gamma: float


@dataclass(frozen=True)
class FloquetResult:
    """Exponents found in a window around the origin, |Im lam| <= pi."""

    exponents: tuple[complex, ...]
    method: str  # "closed_form" or "numeric"
    truncation: int
    translation_residual: float = 0.0


def reduced_coeffs(alpha: float, beta: float, gamma: float) -> ReducedCoeffs:
    """Closed-form reduced-matrix entries for cubic kinetics at sigma = 0."""
    s2 = _SQRT2
    a = -((3.0 * ((1 + 2j) - (1 + 1j) * s2) * alpha * gamma
           + ((6 + 8j) - (4 + 4j) * s2) * beta * beta)
          / (((4 + 8j) - (4 + 4j) * s2) * alpha))
    b = (1 + 1j) / 2.0 * alpha
    d = ((((-2 - 2j) + (1 + 2j) * s2) * beta * beta)
         / ((((-1 - 2j) + (1 + 1j) * s2)) * alpha))
    return ReducedCoeffs(a=a, b=b, c=a, d=d,
                         alpha=alpha, beta=beta, gamma=gamma)


def leading_eigenvalue(coeffs: ReducedCoeffs) -> float:
    """Coefficient of r^2 in the leading nonzero Floquet exponent.

    The physical exponent near onset is this value times r^2; it is real
    by construction, so it is computed directly from a and b rather than
    through any intermediate complex expression.
    """
    return float(-2.0 * (coeffs.a * np.conj(coeffs.b)).real
                 / abs(coeffs.b) ** 2)


def _orbit_weight_spectrum(point: BranchPoint, k: CubicKinetics,
                           n_modes: int) -> np.ndarray:
    """Fourier coefficients of 2*beta*u + 3*gamma*u^2 for |j| <= 2*n_modes.

    Coefficients beyond the grid band |j| <= n/2 are zero, exact for
    resolved orbits whose spectra decay below machine precision there.
    """
    u = point.profile.values
    n = u.size
    u2 = spectral.dealiased_pointwise(u, lambda uf: uf * uf)
    w = 2.0 * k.beta * u + 3.0 * k.gamma * u2
    what = np.fft.fft(w) / n
    what[n // 2] = 0.0
    js = np.arange(-2 * n_modes, 2 * n_modes + 1)
    out = np.zeros(js.size, dtype=complex)
    inside = np.abs(js) <= n // 2
    out[inside] = what[js[inside] % n]
    return out  # index j + 2*n_modes holds coefficient j


def floquet_matrix(point: BranchPoint, k: CubicKinetics, rho: complex,
                   n_modes: int,
                   weights: np.ndarray | None = None) -> np.ndarray:
    """Truncated Floquet operator on modes -n_modes..n_modes at lam = rho^2."""
    if weights is None:
        weights = _orbit_weight_spectrum(point, k, n_modes)
    m = np.arange(-n_modes, n_modes + 1)
    lam = rho * rho
    sym = np.sqrt(point.omega * (1j * m + lam))
    sym[n_modes] = math.sqrt(point.omega) * rho  # analytic in rho at m = 0
    diag = point.omega * (1j * m + lam) + k.alpha - (point.mu + k.flux_gain) * sym
    col = weights[2 * n_modes:]   # coefficients 0..2N
    row = weights[2 * n_modes::-1]  # coefficients 0..-2N
    return np.diag(diag) - scipy.linalg.toeplitz(col, row)


def _floquet_matrix_drho(point: BranchPoint, k: CubicKinetics, rho: complex,
                         n_modes: int) -> np.ndarray:
    m = np.arange(-n_modes, n_modes + 1)
    lam = rho * rho
    dsym = np.empty(2 * n_modes + 1, dtype=complex)
    nz = m != 0
    dsym[nz] = point.omega * rho / np.sqrt(point.omega * (1j * m[nz] + lam))
    dsym[n_modes] = math.sqrt(point.omega)
    ddiag = 2.0 * point.omega * rho - (point.mu + k.flux_gain) * dsym
    return np.diag(ddiag)


def _refine_root(point, k, rho0, n_modes, weights, tol=1e-12, max_iter=40):
    """Bordered Newton for a singular point of the Floquet matrix.

    Solves M(rho) v = 0, c^H v = 1 for (v, rho); returns (rho, residual)
    or None when the iteration fails to settle.
    """
    mat = floquet_matrix(point, k, rho0, n_modes, weights)
    _, sv, vh = scipy.linalg.svd(mat)
    v = vh[-1].conj()
    c = v.copy()
    rho = complex(rho0)
    size = mat.shape[0]
    scale = float(np.linalg.norm(mat, np.inf))
    for _ in range(max_iter):
        mat = floquet_matrix(point, k, rho, n_modes, weights)
        res = np.concatenate([mat @ v, [c.conj() @ v - 1.0]])
        err = float(np.linalg.norm(res[:size], np.inf)) / scale
        if err <= tol:
            return rho, err
        jac = np.zeros((size + 1, size + 1), dtype=complex)
        jac[:size, :size] = mat
        jac[:size, size] = _floquet_matrix_drho(point, k, rho, n_modes) @ v
        jac[size, :size] = c.conj()
        try:
            delta = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return None
        v = v + delta[:size]
        rho = rho + complex(delta[size])
        if not (np.all(np.isfinite(v)) and cmath.isfinite(rho)):
            return None
    return None


def translation_residual(point: BranchPoint, k: CubicKinetics,
                         n_modes: int) -> float:
    """Relative residual of the orbit derivative in the kernel at lam = 0.

    The s-derivative of the orbit solves the exponent-zero problem
    identically, so this measures truncation plus solver error.
    """
    weights = _orbit_weight_spectrum(point, k, n_modes)
    u = point.profile.values
    n = u.size
    uhat = np.fft.fft(u) / n
    ell = spectral.mode_numbers(n)
    dhat = 1j * ell * uhat
    idx = np.arange(-n_modes, n_modes + 1) % n
    vec = dhat[idx]
    mat = floquet_matrix(point, k, 0.0, n_modes, weights)
    return float(np.linalg.norm(mat @ vec) / np.linalg.norm(vec))


def floquet_numeric(point: BranchPoint, k: CubicKinetics,
                    window: tuple[float, float] | None = None,
                    truncation: int = 64,
                    grid_shape: tuple[int, int] = (41, 41),
                    check_truncation: bool = True,
                    truncation_tol: float = 1e-6,
                    zero_tol: float = 1e-8) -> FloquetResult:
    """Locate Floquet exponents of a converged orbit (sigma = 0 only).

    Scans the rectangle |Re lam| <= window[0], |Im lam| <= window[1]
    (default: four times the closed-form estimate by 0.2) for minima of
    the smallest singular value over the rho = sqrt(lam) parameterization,
    refines each candidate by a bordered Newton iteration, and verifies
    the mandatory translation root at lam = 0.  With ``check_truncation``
    each nonzero exponent is re-refined at twice the truncation.

    Raises
    ------
    TruncationError
        If doubling the truncation moves an exponent by more than
        ``truncation_tol`` (relative), or the translation root is not
        resolved to ``zero_tol``.
    """
    if point.profile is None:
        raise ValueError("branch point carries no profile")
    est = leading_eigenvalue(reduced_coeffs(k.alpha, k.beta, k.gamma)) * point.r ** 2
    if window is None:
        window = (max(4.0 * abs(est), 1e-4), 0.2)
    n_modes = truncation
    weights = _orbit_weight_spectrum(point, k, n_modes)

    re = np.linspace(-window[0], window[0], grid_shape[0])
    im = np.linspace(-window[1], window[1], grid_shape[1])
    smin = np.empty(grid_shape)
    rhos = np.sqrt(re[:, None] + 1j * im[None, :])
    for i in range(grid_shape[0]):
        for j in range(grid_shape[1]):
            mat = floquet_matrix(point, k, rhos[i, j], n_modes, weights)
            smin[i, j] = scipy.linalg.svdvals(mat)[-1]

    interior = smin[1:-1, 1:-1]
    neighbors = np.stack([smin[1 + di:grid_shape[0] - 1 + di,
                               1 + dj:grid_shape[1] - 1 + dj]
                          for di in (-1, 0, 1) for dj in (-1, 0, 1)
                          if (di, dj) != (0, 0)])
    is_min = np.all(interior <= neighbors, axis=0)
    seeds = [complex(rhos[i + 1, j + 1])
             for i, j in zip(*np.nonzero(is_min))]
    seeds.append(cmath.sqrt(complex(est)))

    pad = 1.2
    roots: list[complex] = []
    for rho0 in seeds:
        refined = _refine_root(point, k, rho0, n_modes, weights)
        if refined is None:
            continue
        rho, _ = refined
        lam = rho * rho
        if abs(lam.real) > pad * window[0] or abs(lam.imag) > pad * window[1]:
            continue
        if abs(lam) <= zero_tol:
            continue  # the translation root is accounted for separately
        if any(abs(lam - other) <= 1e-10 + 1e-6 * abs(other)
               for other in roots):
            continue
        roots.append(lam)

    zero_res = translation_residual(point, k, n_modes)
    if zero_res > zero_tol:
        raise TruncationError(
            f"translation root unresolved (residual {zero_res:.3e})")

    if check_truncation:
        weights2 = _orbit_weight_spectrum(point, k, 2 * n_modes)
        for lam in roots:
            refined = _refine_root(point, k, cmath.sqrt(lam), 2 * n_modes,
                                   weights2)
            if refined is None:
                raise TruncationError(
                    f"exponent {lam} lost when doubling the truncation")
            lam2 = refined[0] ** 2
            if abs(lam2 - lam) > truncation_tol * max(abs(lam), 1e-30):
                raise TruncationError(
                    f"exponent {lam} moved to {lam2} when doubling "
                    f"the truncation")

    exponents = [0.0 + 0.0j] + sorted(roots, key=lambda z: -z.real)
    return FloquetResult(exponents=tuple(exponents), method="numeric",
                         truncation=n_modes, translation_residual=zero_res)


def classify(point: BranchPoint, k: CubicKinetics,
             method: str = "closed_form", sigma: float = 0.0,
             floquet: FloquetResult | None = None,
             resolution: float = 1e-10) -> tuple[str, float | None]:
    """Stability verdict plus the estimated leading exponent.

    ``closed_form`` uses the reduced-matrix exponent at sigma = 0; with
    positive degradation the orbit inherits the sign of the branching
    direction (supercritical stable, subcritical unstable), which is
    reported through the same channel.  ``numeric`` reads the largest
    real part among the nonzero exponents of a supplied FloquetResult.
    Verdicts below ``resolution`` are "unknown".
    """
    if method == "closed_form":
        if sigma == 0.0:
            lam1 = leading_eigenvalue(
                reduced_coeffs(k.alpha, k.beta, k.gamma)) * point.r ** 2
        else:
            from .normalform import mu2_omega2
            mu2 = mu2_omega2(k.alpha, k.beta, k.gamma, sigma)[0]
            lam1 = -math.copysign(1.0, mu2) * point.r ** 2
    elif method == "numeric":
        if floquet is None:
            raise ValueError("numeric classification needs a FloquetResult")
        nonzero = [z for z in floquet.exponents if abs(z) > 10.0 * resolution]
        if not nonzero:
            return "unknown", None
        lam1 = max(z.real for z in nonzero)
    else:
        raise ValueError(f"unknown method {method!r}")
    if abs(lam1) < resolution:
        return "unknown", float(lam1)
    return ("unstable" if lam1 > 0 else "stable"), float(lam1)
