"""Boundary reaction terms and their derivatives.

The boundary value obeys a scalar ODE du/dt = f(u, g, mu), where g is the
outward normal derivative of the bulk field at the boundary and mu is the
bifurcation parameter.  All evaluations are pointwise and vectorize over
numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

_FD_STEP = 1e-6


class BoundaryKinetics:
    """Scalar boundary vector field f(u, g, mu) with first partials.

    Subclasses override :meth:`f`; they may also override :meth:`partials`
    with analytic expressions.  The default falls back to central finite
    differences with step 1e-6 * max(1, |argument|), accurate to O(h^2).
    """

    def f(self, u, g, mu):
        raise NotImplementedError

    def partials(self, u, g, mu):
        """Return (df/du, df/dg, df/dmu) at the given point."""
        hu = _FD_STEP * np.maximum(1.0, np.abs(u))
        hg = _FD_STEP * np.maximum(1.0, np.abs(g))
        hm = _FD_STEP * max(1.0, abs(mu))
        d1 = (self.f(u + hu, g, mu) - self.f(u - hu, g, mu)) / (2.0 * hu)
        d2 = (self.f(u, g + hg, mu) - self.f(u, g - hg, mu)) / (2.0 * hg)
        dmu = (self.f(u, g, mu + hm) - self.f(u, g, mu - hm)) / (2.0 * hm)
        return d1, d2, dmu


@dataclass(frozen=True)
class CubicKinetics(BoundaryKinetics):
    """f(u, g, mu) = -alpha*u + beta*u^2 + gamma*u^3 + (mu + sqrt(2*alpha))*g.

    The flux coefficient sqrt(2*alpha) places the oscillatory instability of
    the trivial state exactly at mu = 0.
    """

    alpha: float
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def flux_gain(self) -> float:
        return math.sqrt(2.0 * self.alpha)

    def f(self, u, g, mu):
        return (-self.alpha * u + self.beta * u * u + self.gamma * u * u * u
                + (mu + self.flux_gain) * g)

    def partials(self, u, g, mu):
        d1 = -self.alpha + 2.0 * self.beta * u + 3.0 * self.gamma * u * u
        d2 = (mu + self.flux_gain) + 0.0 * u
        dmu = g + 0.0 * u
        return d1, d2, dmu


def equilibrium(k: BoundaryKinetics, mu: float, sigma: float,
                guess: float = 0.0, tol: float = 1e-12,
                max_iter: int = 50) -> float:
    """Spatially constant steady state: solve f(u, sigma*u, mu) = 0 for u.

    Scalar Newton from ``guess`` using the slope d/du f(u, sigma*u, mu)
    = d1 + sigma*d2.  Returns u with |f| <= tol.

    Raises
    ------
    ConvergenceError
        If no root is reached within ``max_iter`` iterations or the slope
        degenerates (absent or ill-conditioned equilibrium).
    """
    u = float(guess)
    for _ in range(max_iter):
        r = float(k.f(u, sigma * u, mu))
        if abs(r) <= tol:
            return u
        d1, d2, _ = k.partials(u, sigma * u, mu)
        slope = float(d1) + sigma * float(d2)
        if slope == 0.0 or not math.isfinite(slope):
            raise ConvergenceError(
                f"equilibrium Newton stalled at u={u!r} (zero slope)")
        u -= r / slope
        if not math.isfinite(u):
            raise ConvergenceError("equilibrium Newton diverged")
    if abs(float(k.f(u, sigma * u, mu))) <= tol:
        return u
    raise ConvergenceError(
        f"equilibrium Newton did not converge after {max_iter} iterations "
        f"(mu={mu}, sigma={sigma}, guess={guess})")
