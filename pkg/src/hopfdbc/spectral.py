"""Periodic boundary traces and diagonal Fourier-multiplier operators.

A trace lives on the uniform grid s_j = 2*pi*j/n of the circle, n a power
of two.  The two workhorse operators are diagonal in Fourier space:

* time derivative under the rescaling s = omega*t: symbol i*omega*ell,
* Dirichlet-to-Neumann map of the half-line bulk: symbol
  sqrt(i*omega*ell + sigma^2) for ell != 0 and sigma for ell = 0,

with principal square roots (Re >= 0, cut along the negative real axis).
The Floquet variant shifts the symbol by a complex exponent.  The Nyquist
mode has no conjugate partner on the grid and is zeroed after every
multiplier application.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BranchCutError

DEFAULT_GRID = 2048

_HERMITIAN_TOL = 1e-10


def grid(n: int) -> np.ndarray:
    """Collocation points s_j = 2*pi*j/n."""
    return 2.0 * np.pi * np.arange(n) / n


def mode_numbers(n: int) -> np.ndarray:
    """Signed mode numbers in FFT storage order."""
    return np.fft.fftfreq(n, d=1.0 / n).astype(int)


def _check_size(n: int):
    if n < 4 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= 4, got {n}")


@dataclass
class PeriodicProfile:
    """Real 2*pi-periodic trace sampled on a power-of-two grid.

    Treated as immutable after construction; the sample array is copied and
    marked read-only.  The spectral view is cached on first use.
    """

    values: np.ndarray
    _half: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("profile values must be one-dimensional")
        _check_size(v.size)
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        v = v.copy()
        v.flags.writeable = False
        self.values = v

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def s(self) -> np.ndarray:
        return grid(self.n)

    @property
    def half_spectrum(self) -> np.ndarray:
        """Coefficients u_hat_ell for ell = 0..n/2 (Hermitian half)."""
        if self._half is None:
            self._half = np.fft.rfft(self.values) / self.n
        return self._half

    def shifted(self, offset: int) -> "PeriodicProfile":
        """Profile translated by ``offset`` grid points."""
        return PeriodicProfile(np.roll(self.values, offset))


def to_spectrum(p: PeriodicProfile) -> np.ndarray:
    """Full complex coefficients u_hat_ell in FFT order, u = sum u_hat_ell e^{i ell s}."""
    return np.fft.fft(p.values) / p.n


def from_spectrum(coeffs: np.ndarray) -> PeriodicProfile:
    """Inverse of :func:`to_spectrum`; input must be Hermitian-symmetric.

    Raises
    ------
    ValueError
        If the coefficients do not describe a real profile.
    """
    c = np.asarray(coeffs, dtype=complex)
    n = c.size
    _check_size(n)
    mirrored = np.conj(c[(-np.arange(n)) % n])
    scale = max(1.0, float(np.max(np.abs(c))))
    if np.max(np.abs(c - mirrored)) > _HERMITIAN_TOL * scale:
        raise ValueError("coefficients are not Hermitian-symmetric; "
                         "a real profile was requested")
    vals = np.fft.ifft(c) * n
    return PeriodicProfile(vals.real)


def amplitude(p: PeriodicProfile) -> float:
    """First-mode amplitude r = 2*|u_hat_1|, so r*cos(s) has amplitude r."""
    return 2.0 * abs(p.half_spectrum[1])


def apply_half_symbol(values: np.ndarray, symbol_half: np.ndarray) -> np.ndarray:
    """Apply a multiplier to a real signal via its half-spectrum symbol.

    ``symbol_half[ell]`` for ell = 0..n/2 must extend to the negative modes
    by conjugation; the Nyquist entry is zeroed.
    """
    n = values.size
    spec = np.fft.rfft(values)
    spec *= symbol_half
    spec[-1] = 0.0
    return np.fft.irfft(spec, n)


def time_derivative_symbol(omega: float, n: int) -> np.ndarray:
    ell = np.arange(n // 2 + 1)
    return 1j * omega * ell


def dtn_symbol(omega: float, sigma: float, n: int) -> np.ndarray:
    ell = np.arange(n // 2 + 1)
    sym = np.sqrt(1j * omega * ell + sigma * sigma + 0j)
    sym[0] = sigma
    return sym


def dtn_symbol_domega(omega: float, sigma: float, n: int) -> np.ndarray:
    """Derivative of the Dirichlet-to-Neumann symbol in omega."""
    ell = np.arange(n // 2 + 1)
    sym = np.empty(n // 2 + 1, dtype=complex)
    sym[0] = 0.0
    sym[1:] = 0.5j * ell[1:] / np.sqrt(1j * omega * ell[1:] + sigma * sigma + 0j)
    return sym


def apply_time_derivative(omega: float, p: PeriodicProfile) -> PeriodicProfile:
    """omega * d/ds, the boundary time derivative in rescaled time."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    return PeriodicProfile(apply_half_symbol(p.values, time_derivative_symbol(omega, p.n)))


def apply_dtn(omega: float, sigma: float, p: PeriodicProfile) -> PeriodicProfile:
    """Dirichlet-to-Neumann map of the damped half-line bulk."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    return PeriodicProfile(apply_half_symbol(p.values, dtn_symbol(omega, sigma, p.n)))


def apply_dtn_floquet(omega: float, lam: complex, values: np.ndarray) -> np.ndarray:
    """Dirichlet-to-Neumann map shifted by a Floquet exponent.

    Acts on a complex signal; the symbol is sqrt(omega*(i*ell + lam)) for
    ell != 0 and sqrt(omega)*sqrt(lam) for ell = 0 (principal roots).

    Raises
    ------
    BranchCutError
        If i*ell + lam hits the branch cut for a represented mode.
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    vals = np.asarray(values, dtype=complex)
    n = vals.size
    _check_size(n)
    lam = complex(lam)
    ell = mode_numbers(n)
    shifted = 1j * ell + lam
    on_cut = (shifted.imag == 0.0) & (shifted.real < 0.0)
    if np.any(on_cut & (ell != 0)) or (lam.imag == 0.0 and lam.real < 0.0):
        raise BranchCutError(
            f"i*ell + lam on the branch cut for lam={lam}")
    sym = np.sqrt(omega * shifted)
    sym[ell == 0] = math.sqrt(omega) * np.sqrt(lam)
    spec = np.fft.fft(vals) / n
    spec *= sym
    spec[n // 2] = 0.0
    return np.fft.ifft(spec * n)


def refine(values: np.ndarray, factor: int = 2) -> np.ndarray:
    """Spectral upsampling of a real signal by an integer factor."""
    n = values.size
    spec = np.fft.rfft(values)
    spec[-1] = 0.0
    padded = np.zeros(factor * n // 2 + 1, dtype=complex)
    padded[: n // 2 + 1] = spec
    return factor * np.fft.irfft(padded, factor * n)


def restrict(values_fine: np.ndarray, n: int) -> np.ndarray:
    """Spectral truncation of a real signal back to n points."""
    nf = values_fine.size
    if nf % n:
        raise ValueError(f"fine grid {nf} is not a multiple of {n}")
    spec = np.fft.rfft(values_fine)[: n // 2 + 1] * (n / nf)
    spec[-1] = 0.0
    return np.fft.irfft(spec, n)


def dealiased_pointwise(values: np.ndarray, fn, *fine_args) -> np.ndarray:
    """Evaluate ``fn`` pointwise on a 2x-refined grid and truncate back.

    Removes aliasing of quadratic and cubic products of band-limited
    signals.  Extra array arguments are refined alongside ``values``.
    """
    n = values.size
    fine = fn(refine(values), *[refine(a) for a in fine_args])
    return restrict(np.asarray(fine, dtype=float), n)


def operator_matrix(op, n: int) -> np.ndarray:
    """Dense matrix of a translation-invariant real operator on the grid.

    ``op`` maps length-n sample arrays to length-n sample arrays and must
    commute with grid shifts (any Fourier multiplier does), making the
    matrix circulant: one impulse response determines it.
    """
    e0 = np.zeros(n)
    e0[0] = 1.0
    return scipy.linalg.circulant(op(e0))
