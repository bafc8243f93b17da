"""Secant (pseudo-arclength) continuation of the periodic-orbit branch.

The branch is followed in the full unknown vector (profile, omega, mu): a
secant of the last two points predicts the next one, and a bordered Newton
corrector solves residual = 0, phase = 0, plus an arclength normalization
row orthogonal to the secant.  Profile deviations enter the arclength in
the discrete L2 norm scaled by 1/sqrt(n) so that step sizes mean the same
thing at every grid resolution; omega and mu carry weight one.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import bvp, normalform, spectral
from .bvp import BvpState, NewtonSettings
from .dispersion import HopfPoint
from .errors import ConvergenceError
from .kinetics import BoundaryKinetics, CubicKinetics, equilibrium
from .normalform import ExpansionCoefficients
from .spectral import PeriodicProfile

CSV_COLUMNS = ("index", "mu", "omega", "r", "u_inf", "newton_iters",
               "residual", "stability", "lambda1", "termination")


@dataclass(frozen=True)
class ContinuationSettings:
    ds0: float = 5e-3
    ds_min: float = 1e-7
    ds_max: float = 0.1
    max_points: int = 2000
    omega_min: float = 1e-3
    grow_factor: float = 2.0
    shrink_factor: float = 0.5
    fast_iters: int = 3

    def __post_init__(self):
        if not (0 < self.ds_min <= self.ds0 <= self.ds_max):
            raise ValueError("require 0 < ds_min <= ds0 <= ds_max")
        if self.max_points < 2:
            raise ValueError("max_points must be at least 2")


@dataclass(frozen=True)
class BranchPoint:
    """One converged orbit along the branch."""

    mu: float
    omega: float
    r: float
    u_inf: float
    profile: PeriodicProfile | None
    stability: str = "unknown"
    lambda1: float | None = None
    newton_iters: int = 0
    residual_norm: float = 0.0


@dataclass
class Branch:
    """Ordered branch with its termination reason and onset data."""

    points: list[BranchPoint] = field(default_factory=list)
    termination: str = "completed"
    mu_star: float | None = None
    omega_star: float | None = None
    sigma: float = 0.0

    def __len__(self):
        return len(self.points)


def _make_point(result: bvp.NewtonResult, k: BoundaryKinetics) -> BranchPoint:
    state = result.state
    u_star = equilibrium(k, state.mu, state.sigma)
    return BranchPoint(
        mu=state.mu, omega=state.omega,
        r=spectral.amplitude(state.profile),
        u_inf=u_star + float(np.mean(state.profile.values)),
        profile=state.profile,
        newton_iters=result.iterations,
        residual_norm=result.residual_norm)


def seed_branch(k: CubicKinetics, hopf: HopfPoint,
                coeffs: ExpansionCoefficients,
                r0: float = 0.01, r1: float = 0.02, n: int = 256,
                newton: NewtonSettings | None = None
                ) -> tuple[BranchPoint, BranchPoint]:
    """Two converged branch points from asymptotic initial guesses.

    Each seed starts from the second-order profile at amplitude r with
    mu = mu_star + mu2*r^2 and omega = omega_star + omega2*r^2, then is
    corrected by the bordered Newton solve at fixed mu.
    """
    if not 0 < r0 < r1:
        raise ValueError(f"require 0 < r0 < r1, got ({r0}, {r1})")
    seeds = []
    for r in (r0, r1):
        profile = normalform.initial_profile(
            r, k.alpha, k.beta, k.gamma, sigma=hopf.sigma_star, order=2,
            n=n, coeffs=coeffs)
        state = BvpState(profile=profile,
                         omega=hopf.omega_star + coeffs.omega2 * r * r,
                         mu=hopf.mu_star + coeffs.mu2 * r * r,
                         sigma=hopf.sigma_star)
        result = bvp.newton_solve(state, k, newton, require_nontrivial=True)
        seeds.append(_make_point(result, k))
    return seeds[0], seeds[1]


def _pack(point: BranchPoint) -> np.ndarray:
    return np.concatenate([point.profile.values, [point.omega, point.mu]])


def _weighted_norm(x: np.ndarray, n: int) -> float:
    return math.sqrt(float(x[:n] @ x[:n]) / n + x[n] ** 2 + x[n + 1] ** 2)


def _mu_column(state: BvpState, k: BoundaryKinetics) -> np.ndarray:
    """d(residual)/d(mu), including the equilibrium branch drift."""
    v = state.profile.values
    u_star = equilibrium(k, state.mu, state.sigma)
    d1e, d2e, dmue = k.partials(u_star, state.sigma * u_star, state.mu)
    slope = float(d1e) + state.sigma * float(d2e)
    if slope == 0.0:
        raise ConvergenceError("equilibrium branch is not differentiable here")
    ustar_prime = -float(dmue) / slope
    flux = spectral.apply_dtn(state.omega, state.sigma, state.profile).values
    d1, d2, dmu = k.partials(u_star + v, state.sigma * u_star + flux, state.mu)
    col = -(np.asarray(d1) * ustar_prime
            + np.asarray(d2) * state.sigma * ustar_prime
            + np.asarray(dmu))
    return np.broadcast_to(np.asarray(col, dtype=float), (state.profile.n,)).copy()


def _correct(k, x_pred, tangent, sigma, newton: NewtonSettings):
    """Bordered Newton corrector for the arclength system."""
    n = x_pred.size - 2
    x = x_pred.copy()
    weights = np.concatenate([tangent[:n] / n, tangent[n:]])
    for it in range(newton.max_iter + 1):
        if x[n] <= 0:
            raise ConvergenceError("corrector left omega > 0")
        state = BvpState(profile=PeriodicProfile(x[:n]), omega=float(x[n]),
                         mu=float(x[n + 1]), sigma=sigma)
        res = bvp.residual(state, k).values
        ph = bvp.phase(state.profile)
        arc = float(weights @ (x - x_pred))
        err = max(float(np.max(np.abs(res))), abs(ph), abs(arc))
        if err <= newton.residual_tol:
            return state, it, float(np.max(np.abs(res)))
        if it == newton.max_iter:
            break
        core = bvp.jacobian(state, k, newton)
        jac = np.zeros((n + 2, n + 2))
        jac[: n + 1, : n + 1] = core
        jac[:n, n + 1] = _mu_column(state, k)
        jac[n + 1, :] = weights
        rhs = -np.concatenate([res, [ph, arc]])
        try:
            delta = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular bordered Jacobian") from exc
        if not np.all(np.isfinite(delta)):
            raise ConvergenceError("corrector update is not finite")
        x = x + delta
    raise ConvergenceError(f"corrector stalled (error {err:.3e})")


def continue_branch(k: BoundaryKinetics,
                    seeds: tuple[BranchPoint, BranchPoint],
                    settings: ContinuationSettings | None = None,
                    newton: NewtonSettings | None = None,
                    sigma: float = 0.0,
                    hopf: HopfPoint | None = None) -> Branch:
    """Extend a branch from two seeds until a stopping rule fires.

    The step doubles after fast convergence (<= ``fast_iters`` corrector
    iterations) and halves after a failure; the branch records why it
    stopped: ``completed`` (max_points), ``step_underflow``,
    ``homoclinic_suspected`` (omega fell below omega_min), or
    ``newton_failure`` (no step beyond the seeds succeeded).
    """
    settings = settings or ContinuationSettings()
    newton = newton or NewtonSettings()
    if hopf is not None and sigma != hopf.sigma_star:
        raise ValueError("sigma disagrees with the Hopf point")
    branch = Branch(points=list(seeds), termination="completed",
                    mu_star=None if hopf is None else hopf.mu_star,
                    omega_star=None if hopf is None else hopf.omega_star,
                    sigma=sigma)
    n = seeds[0].profile.n
    xs = [_pack(seeds[0]), _pack(seeds[1])]
    ds = settings.ds0
    while len(branch.points) < settings.max_points:
        secant = xs[-1] - xs[-2]
        norm = _weighted_norm(secant, n)
        if norm == 0.0:
            branch.termination = "step_underflow"
            return branch
        tangent = secant / norm
        while True:
            x_pred = xs[-1] + ds * tangent
            try:
                state, iters, res_norm = _correct(k, x_pred, tangent, sigma, newton)
                break
            except ConvergenceError:
                ds *= settings.shrink_factor
                if ds < settings.ds_min:
                    branch.termination = ("newton_failure"
                                          if len(branch.points) == 2
                                          else "step_underflow")
                    return branch
        result = bvp.NewtonResult(state=state, iterations=iters,
                                  residual_norm=res_norm, phase_residual=0.0)
        point = _make_point(result, k)
        branch.points.append(point)
        xs.append(_pack(point))
        if point.omega < settings.omega_min:
            branch.termination = "homoclinic_suspected"
            return branch
        if iters <= settings.fast_iters:
            ds = min(ds * settings.grow_factor, settings.ds_max)
    branch.termination = "completed"
    return branch


def _leading_slope(r: np.ndarray, y: np.ndarray) -> float:
    """Coefficient of r^2 in the model y = c2*r^2 + c4*r^4.

    The quartic regressor absorbs the next term of the expansion, which
    otherwise biases the leading coefficient at any fixed window.
    """
    basis = np.column_stack([r ** 2, r ** 4])
    coeff, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return float(coeff[0])


def fit_mu2(branch: Branch, r_window: tuple[float, float] = (0.02, 0.1),
            mu_star: float | None = None, omega_star: float | None = None
            ) -> tuple[float, float]:
    """Fitted leading coefficients of mu - mu_star and omega - omega_star.

    Raises
    ------
    ValueError
        With fewer than five branch points inside the amplitude window.
    """
    mu_star = branch.mu_star if mu_star is None else mu_star
    omega_star = branch.omega_star if omega_star is None else omega_star
    if mu_star is None or omega_star is None:
        raise ValueError("onset data (mu_star, omega_star) unavailable")
    pts = [p for p in branch.points if r_window[0] <= p.r <= r_window[1]]
    if len(pts) < 5:
        raise ValueError(f"insufficient points in r window {r_window} "
                         f"({len(pts)} < 5)")
    r = np.array([p.r for p in pts])
    mu = np.array([p.mu for p in pts]) - mu_star
    om = np.array([p.omega for p in pts]) - omega_star
    return _leading_slope(r, mu), _leading_slope(r, om)


def fit_uinf2(branch: Branch, r_window: tuple[float, float] = (0.02, 0.1)
              ) -> float:
    """Fitted leading coefficient of the far-field constant in r^2."""
    pts = [p for p in branch.points if r_window[0] <= p.r <= r_window[1]]
    if len(pts) < 5:
        raise ValueError(f"insufficient points in r window {r_window}")
    r = np.array([p.r for p in pts])
    ui = np.array([p.u_inf for p in pts])
    return _leading_slope(r, ui)


def _format(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def write_branch_csv(branch: Branch, path, header_lines: tuple[str, ...] = ()):
    """Write the branch table; the termination reason goes on the last row."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        last = len(branch.points) - 1
        for i, p in enumerate(branch.points):
            writer.writerow([
                i, _format(p.mu), _format(p.omega), _format(p.r),
                _format(p.u_inf), p.newton_iters, _format(p.residual_norm),
                p.stability, _format(p.lambda1),
                branch.termination if i == last else ""])


def write_profiles(branch: Branch, path):
    """Sidecar matrix of profile samples, one row per branch point."""
    rows = [p.profile.values for p in branch.points]
    if any(r is None for r in rows):
        raise ValueError("branch points lack profiles")
    np.save(path, np.vstack(rows))


def read_branch_csv(path, profiles_path=None, sigma: float = 0.0) -> Branch:
    """Read a branch table (and optional profile sidecar) back."""
    with open(path) as fh:
        text = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("".join(text)))
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"unexpected branch schema in {path}: "
                         f"{reader.fieldnames}")
    profiles = None
    if profiles_path is not None:
        profiles = np.load(profiles_path)
    points = []
    termination = "completed"
    for row in reader:
        idx = int(row["index"])
        profile = None
        if profiles is not None:
            profile = PeriodicProfile(profiles[idx])
        points.append(BranchPoint(
            mu=float(row["mu"]), omega=float(row["omega"]),
            r=float(row["r"]), u_inf=float(row["u_inf"]),
            profile=profile,
            stability=row["stability"] or "unknown",
            lambda1=float(row["lambda1"]) if row["lambda1"] else None,
            newton_iters=int(row["newton_iters"]),
            residual_norm=float(row["residual"])))
        if row["termination"]:
            termination = row["termination"]
    if not points:
        raise ValueError(f"empty branch file {path}")
    return Branch(points=points, termination=termination, sigma=sigma)


def annotate(branch: Branch, index: int, stability: str,
             lambda1: float | None) -> None:
    """Replace the stability annotation of one branch point in place."""
    branch.points[index] = replace(branch.points[index],
                                   stability=stability, lambda1=lambda1)
