"""Batch command-line surface tying the toolkit together.

Subcommands: hopf, expand, continue, stability, simulate, reconstruct,
sweep.  Configuration comes from an optional JSON file plus overriding
flags; every output embeds the SHA-256 of the resolved configuration so
runs are reproducible byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 assumption-check failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bvp, continuation, dispersion, fieldsim, normalform, stability
from .bvp import NewtonSettings
from .continuation import Branch, ContinuationSettings
from .errors import (BranchCutError, ConvergenceError, DivergenceError,
                     SteadyStateError, TruncationError)
from .fieldsim import SimSettings
from .kinetics import CubicKinetics, equilibrium
from .spectral import PeriodicProfile

SCHEMA = 1
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ASSUMPTION = 4

_NUMERIC_ERRORS = (ConvergenceError, DivergenceError, TruncationError,
                   BranchCutError, SteadyStateError, ArithmeticError,
                   np.linalg.LinAlgError)


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration of one CLI run."""

    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    sigma: float = 0.0
    n: int = 2048
    seed: int = 0
    newton: NewtonSettings = field(default_factory=NewtonSettings)
    continuation: ContinuationSettings = field(default_factory=ContinuationSettings)
    simulation: SimSettings = field(default_factory=SimSettings)

    def validate(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        def section(klass, sub, name):
            if not isinstance(sub, dict):
                raise ValueError(f"config section {name!r} must be an object")
            allowed = {f.name for f in dataclasses.fields(klass)}
            unknown = sorted(set(sub) - allowed)
            if unknown:
                raise ValueError(f"unknown {name} keys: {unknown}")
            return klass(**sub)

        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        kwargs = dict(data)
        for name, klass in (("newton", NewtonSettings),
                            ("continuation", ContinuationSettings),
                            ("simulation", SimSettings)):
            if name in kwargs:
                kwargs[name] = section(klass, kwargs[name], name)
        return cls(**kwargs)

    def sha256(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _load_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
    cfg = RunConfig.from_dict(data)
    overrides = {}
    for name in ("alpha", "beta", "gamma", "sigma", "n", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    nested = {
        "continuation": ("max_points", "ds0", "ds_max", "omega_min"),
        "simulation": ("L", "dx", "dt", "T", "far_bc"),
    }
    for section, names in nested.items():
        sub = {}
        for name in names:
            value = getattr(args, f"{section}_{name}", None)
            if value is not None:
                sub[name] = value
        if sub:
            overrides[section] = dataclasses.replace(getattr(cfg, section), **sub)
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _emit_json(doc: dict, out_path=None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)


def _json_float(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return x


def cmd_hopf(args) -> int:
    cfg = _load_config(args)
    k = CubicKinetics(cfg.alpha, cfg.beta, cfg.gamma)
    try:
        hp = dispersion.find_hopf(k, cfg.sigma)
    except _NUMERIC_ERRORS as exc:
        _emit_json({"schema": SCHEMA, "config_sha256": cfg.sha256(),
                    "error": f"no Hopf point found: {exc}"}, args.out)
        return EXIT_NUMERIC
    report = dispersion.check_assumptions(hp, k)
    doc = {
        "schema": SCHEMA,
        "config_sha256": cfg.sha256(),
        "omega_star": hp.omega_star,
        "mu_star": hp.mu_star,
        "sigma": hp.sigma_star,
        "u_star": hp.u_star,
        "crossing": hp.crossing,
        "assumptions": {
            "root_ok": report.root_ok,
            "uniqueness_ok": report.uniqueness_ok,
            "simple_ok": report.simple_ok,
            "crossing_ok": report.crossing_ok,
        },
    }
    _emit_json(doc, args.out)
    return EXIT_OK if report.all_ok else EXIT_ASSUMPTION


def cmd_expand(args) -> int:
    cfg = _load_config(args)
    try:
        coeffs = normalform.expansion_coefficients(cfg.alpha, cfg.beta,
                                                   cfg.gamma, cfg.sigma)
    except ValueError as exc:
        _emit_json({"schema": SCHEMA, "config_sha256": cfg.sha256(),
                    "error": str(exc)}, args.out)
        return EXIT_NUMERIC
    tol = 1e-10
    if coeffs.mu2 > tol:
        criticality = "super"
    elif coeffs.mu2 < -tol:
        criticality = "sub"
    else:
        criticality = "degenerate"
    doc = {
        "schema": SCHEMA,
        "config_sha256": cfg.sha256(),
        "omega_star": coeffs.omega_star,
        "mu2": coeffs.mu2,
        "omega2": coeffs.omega2,
        "uinf2": coeffs.uinf2,
        "gamma_crit": coeffs.gamma_crit,
        "v20": coeffs.v20,
        "v22_re": coeffs.v22.real,
        "v22_im": coeffs.v22.imag,
        "criticality": criticality,
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def _run_branch(cfg: RunConfig, r0: float, r1: float) -> tuple[Branch, object, object]:
    k = CubicKinetics(cfg.alpha, cfg.beta, cfg.gamma)
    hp = dispersion.find_hopf(k, cfg.sigma)
    coeffs = normalform.expansion_coefficients(cfg.alpha, cfg.beta,
                                               cfg.gamma, cfg.sigma)
    seeds = continuation.seed_branch(k, hp, coeffs, r0, r1, n=cfg.n,
                                     newton=cfg.newton)
    branch = continuation.continue_branch(k, seeds, cfg.continuation,
                                          cfg.newton, sigma=cfg.sigma, hopf=hp)
    return branch, hp, coeffs


def _plot_branch(branch: Branch, coeffs, hopf, path: str, cfg_hash: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = cfg_hash
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    mus = [p.mu for p in branch.points]
    rs = [p.r for p in branch.points]
    ax.plot(mus, rs, "o-", markersize=2.5, linewidth=0.8,
            color="tab:blue", label="continuation")
    rr = np.linspace(0.0, max(rs), 200)
    ax.plot(hopf.mu_star + coeffs.mu2 * rr ** 2, rr, color="magenta",
            linewidth=1.2, label="quadratic asymptotics")
    ax.set_xlabel("mu")
    ax.set_ylabel("first-mode amplitude r")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, format="svg",
                metadata={"Date": None,
                          "Description": f"config_sha256={cfg_hash}"})
    plt.close(fig)


def cmd_continue(args) -> int:
    cfg = _load_config(args)
    branch, hp, coeffs = _run_branch(cfg, args.r0, args.r1)
    header = (f"config_sha256={cfg.sha256()}",)
    continuation.write_branch_csv(branch, args.out, header_lines=header)
    if args.profiles:
        continuation.write_profiles(branch, args.profiles)
    if args.plot:
        _plot_branch(branch, coeffs, hp, args.plot, cfg.sha256())
    _emit_json({
        "schema": SCHEMA,
        "config_sha256": cfg.sha256(),
        "points": len(branch.points),
        "termination": branch.termination,
        "mu_min": min(p.mu for p in branch.points),
        "mu_max": max(p.mu for p in branch.points),
        "r_max": max(p.r for p in branch.points),
        "omega_final": branch.points[-1].omega,
    })
    return EXIT_OK


def cmd_stability(args) -> int:
    cfg = _load_config(args)
    k = CubicKinetics(cfg.alpha, cfg.beta, cfg.gamma)
    branch = continuation.read_branch_csv(args.branch,
                                          profiles_path=args.profiles,
                                          sigma=cfg.sigma)
    for i, point in enumerate(branch.points):
        use_numeric = (args.method == "numeric" and point.profile is not None
                       and i % args.stride == 0)
        if use_numeric:
            result = stability.floquet_numeric(point, k,
                                               truncation=args.truncation)
            verdict, lam1 = stability.classify(point, k, "numeric",
                                               floquet=result)
        else:
            verdict, lam1 = stability.classify(point, k, "closed_form",
                                               sigma=cfg.sigma)
        continuation.annotate(branch, i, verdict, lam1)
    continuation.write_branch_csv(branch, args.out,
                                  header_lines=(f"config_sha256={cfg.sha256()}",))
    _emit_json({
        "schema": SCHEMA,
        "config_sha256": cfg.sha256(),
        "points": len(branch.points),
        "stable": sum(p.stability == "stable" for p in branch.points),
        "unstable": sum(p.stability == "unstable" for p in branch.points),
        "unknown": sum(p.stability == "unknown" for p in branch.points),
    })
    return EXIT_OK


def _initial_data(cfg: RunConfig, mode: str, amplitude: float, m: int,
                  dx: float):
    if mode == "zero":
        return 0.0
    if mode == "boundary":
        return amplitude
    if mode == "random":
        rng = np.random.default_rng(cfg.seed)
        x = np.arange(m + 1) * dx
        bulk = amplitude * rng.standard_normal(m + 1) * np.exp(-x)
        return (amplitude, bulk)
    raise ValueError(f"unknown init mode {mode!r}")


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    k = CubicKinetics(cfg.alpha, cfg.beta, cfg.gamma)
    sim = cfg.simulation
    m = int(round(sim.L / sim.dx))
    init = _initial_data(cfg, args.init_mode, args.init_amplitude, m, sim.dx)
    code = EXIT_OK
    try:
        traj = fieldsim.simulate(k, args.mu, cfg.sigma, sim, init)
        note = ""
    except DivergenceError as exc:
        traj = exc.trajectory
        note = str(exc)
        code = EXIT_NUMERIC
    with open(args.out, "w") as fh:
        fh.write(f"# config_sha256={cfg.sha256()}\n")
        fh.write("t,u_minus,flux\n")
        for t, ub, g in zip(traj.t, traj.u_minus, traj.flux):
            fh.write(f"{float(t)!r},{float(ub)!r},{float(g)!r}\n")
    doc = {"schema": SCHEMA, "config_sha256": cfg.sha256(), "mu": args.mu,
           "final_u_minus": float(traj.u_minus[-1])}
    if note:
        doc["error"] = note
    else:
        try:
            omega_est, r_est = fieldsim.extract_period(traj)
            doc["oscillation"] = {"omega": omega_est, "r": r_est}
        except SteadyStateError:
            doc["oscillation"] = None
    _emit_json(doc, None)
    return code


def cmd_reconstruct(args) -> int:
    cfg = _load_config(args)
    k = CubicKinetics(cfg.alpha, cfg.beta, cfg.gamma)
    x = np.linspace(0.0, args.xmax, args.nx)
    if args.equilibrium:
        u_star = equilibrium(k, args.mu, cfg.sigma)
        profile = PeriodicProfile(np.full(cfg.n, u_star))
        try:
            omega = dispersion.find_hopf(k, cfg.sigma).omega_star
        except ConvergenceError:
            omega = 1.0
    else:
        if args.branch is None or args.profiles is None:
            raise ValueError("reconstruct needs --branch and --profiles, "
                             "or --equilibrium")
        branch = continuation.read_branch_csv(args.branch,
                                              profiles_path=args.profiles,
                                              sigma=cfg.sigma)
        point = branch.points[args.index]
        profile, omega = point.profile, point.omega
    slice_ = fieldsim.reconstruct(profile, omega, cfg.sigma, x)
    try:
        u_inf, c, eta = fieldsim.fit_far_field(slice_)
    except ValueError as exc:
        raise ConvergenceError(str(exc)) from exc
    with open(args.out, "w") as fh:
        fh.write(f"# config_sha256={cfg.sha256()}\n")
        fh.write("s," + ",".join(repr(float(xi)) for xi in x) + "\n")
        for j, s in enumerate(slice_.s_grid):
            row = ",".join(repr(float(v)) for v in slice_.values[j])
            fh.write(f"{float(s)!r},{row}\n")
    _emit_json({"schema": SCHEMA, "config_sha256": cfg.sha256(),
                "omega": omega, "u_inf": u_inf,
                "eta": _json_float(eta), "C": _json_float(c)})
    return EXIT_OK


def _sweep_task(payload: dict):
    gamma = payload["gamma"]
    try:
        mu2_closed = normalform.mu2_omega2(payload["alpha"], payload["beta"],
                                           gamma, payload["sigma"])[0]
    except Exception as exc:  # record and continue the sweep
        return (gamma, math.nan, math.nan, "error", str(exc))
    try:
        cfg = RunConfig.from_dict(payload["config"])
        cfg = dataclasses.replace(cfg, gamma=gamma)
        branch, _, _ = _run_branch(cfg, payload["r0"], payload["r1"])
        mu2_fit, _ = continuation.fit_mu2(branch, tuple(payload["window"]))
    except Exception as exc:
        return (gamma, mu2_closed, math.nan, "error", str(exc))
    if abs(mu2_closed) < 1e-8:
        flag = "degenerate"
    else:
        flag = "true" if mu2_closed * mu2_fit > 0 else "false"
    return (gamma, mu2_closed, mu2_fit, flag, "")


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    gammas = np.linspace(args.gamma_min, args.gamma_max, args.points)
    fit_cont = dataclasses.replace(cfg.continuation, ds0=5e-3, ds_max=0.01,
                                   max_points=args.fit_points)
    base = dataclasses.replace(cfg, n=args.fit_n, continuation=fit_cont)
    payloads = [{
        "gamma": float(g),
        "alpha": cfg.alpha, "beta": cfg.beta, "sigma": cfg.sigma,
        "config": base.to_dict(),
        "r0": 0.02, "r1": 0.03,
        "window": [0.03, 0.1],
    } for g in gammas]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_task, payloads))
    else:
        rows = [_sweep_task(p) for p in payloads]
    with open(args.out, "w") as fh:
        fh.write(f"# config_sha256={cfg.sha256()}\n")
        fh.write("gamma,mu2_closed,mu2_fit,agree_flag\n")
        for gamma, closed, fit, flag, _note in rows:
            fh.write(f"{gamma!r},{closed!r},{fit!r},{flag}\n")
    failures = [(g, note) for g, _, _, flag, note in rows if flag == "error"]
    _emit_json({"schema": SCHEMA, "config_sha256": cfg.sha256(),
                "points": len(rows), "failures": len(failures)})
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--alpha", type=float, help="linear decay rate (> 0)")
    parser.add_argument("--beta", type=float, help="quadratic coefficient")
    parser.add_argument("--gamma", type=float, help="cubic coefficient")
    parser.add_argument("--sigma", type=float, help="bulk degradation rate (>= 0)")
    parser.add_argument("--n", type=int, help="boundary grid size (power of two)")
    parser.add_argument("--seed", type=int, help="random seed for initial data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopf-dbc",
        description="Oscillation onset analysis for a diffusive field "
                    "coupled to a dynamic boundary condition")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hopf", help="locate the Hopf point and check it")
    _add_common(p)
    p.add_argument("--out", help="also write the JSON document here")
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("expand", help="branch expansion coefficients")
    _add_common(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("continue", help="continue the periodic-orbit branch")
    _add_common(p)
    p.add_argument("--r0", type=float, default=0.01)
    p.add_argument("--r1", type=float, default=0.02)
    p.add_argument("--out", default="branch.csv")
    p.add_argument("--profiles", help="sidecar .npy of profile samples")
    p.add_argument("--plot", help="SVG bifurcation diagram")
    p.add_argument("--continuation-max_points", dest="continuation_max_points",
                   type=int)
    p.add_argument("--continuation-ds0", dest="continuation_ds0", type=float)
    p.add_argument("--continuation-ds_max", dest="continuation_ds_max",
                   type=float)
    p.add_argument("--continuation-omega_min", dest="continuation_omega_min",
                   type=float)
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("stability", help="annotate a branch with stability")
    _add_common(p)
    p.add_argument("--branch", required=True)
    p.add_argument("--profiles")
    p.add_argument("--method", choices=("closed", "numeric"), default="closed")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--truncation", type=int, default=64)
    p.add_argument("--out", default="branch_stability.csv")
    p.set_defaults(func=cmd_stability,
                   method_map={"closed": "closed_form", "numeric": "numeric"})

    p = sub.add_parser("simulate", help="direct time integration")
    _add_common(p)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--init-mode", choices=("zero", "boundary", "random"),
                   default="boundary")
    p.add_argument("--init-amplitude", type=float, default=0.05)
    p.add_argument("--simulation-T", dest="simulation_T", type=float)
    p.add_argument("--simulation-dt", dest="simulation_dt", type=float)
    p.add_argument("--simulation-dx", dest="simulation_dx", type=float)
    p.add_argument("--simulation-L", dest="simulation_L", type=float)
    p.add_argument("--simulation-far_bc", dest="simulation_far_bc",
                   choices=("dirichlet_zero", "neumann_zero"))
    p.add_argument("--out", default="trajectory.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="extend a boundary orbit into the bulk")
    _add_common(p)
    p.add_argument("--branch")
    p.add_argument("--profiles")
    p.add_argument("--index", type=int, default=-1)
    p.add_argument("--equilibrium", action="store_true",
                   help="reconstruct the constant steady state instead")
    p.add_argument("--mu", type=float, default=0.0,
                   help="parameter for the equilibrium reconstruction")
    p.add_argument("--xmax", type=float, default=25.0)
    p.add_argument("--nx", type=int, default=251)
    p.add_argument("--out", default="field.csv")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sweep", help="criticality sweep over gamma")
    _add_common(p)
    p.add_argument("--gamma-min", type=float, required=True)
    p.add_argument("--gamma-max", type=float, required=True)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--fit-points", type=int, default=40,
                   help="continuation budget per sweep point")
    p.add_argument("--fit-n", type=int, default=256,
                   help="grid size for the per-point branch fits")
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "method") and hasattr(args, "method_map"):
        args.method = args.method_map[args.method]
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(json.dumps({"schema": SCHEMA, "error": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"schema": SCHEMA, "error": str(exc)}),
              file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
