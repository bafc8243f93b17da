"""Hopf bifurcation toolkit for a half-line diffusive field coupled to a
dynamic boundary condition: linear dispersion analysis, branch expansions,
spectral continuation of periodic orbits, Floquet stability, and a direct
time-domain simulator."""

from .bvp import BvpState, NewtonSettings, newton_solve, phase, residual
from .continuation import (Branch, BranchPoint, ContinuationSettings,
                           continue_branch, fit_mu2, seed_branch)
from .dispersion import (AssumptionReport, HopfPoint, char_fn,
                         check_assumptions, find_hopf)
from .errors import (BranchCutError, ConvergenceError, DivergenceError,
                     SteadyStateError, TruncationError)
from .fieldsim import (FieldSlice, SimSettings, Trajectory, extract_period,
                       fit_far_field, reconstruct, simulate)
from .kinetics import BoundaryKinetics, CubicKinetics, equilibrium
from .normalform import (ExpansionCoefficients, expansion_coefficients,
                         gamma_crit, hopf_frequency, initial_profile,
                         lambda_coeffs, mu2_omega2, mu2_omega2_sigma0)
from .spectral import (PeriodicProfile, amplitude, apply_dtn,
                       apply_dtn_floquet, apply_time_derivative,
                       from_spectrum, to_spectrum)
from .stability import (FloquetResult, ReducedCoeffs, classify,
                        floquet_numeric, leading_eigenvalue, reduced_coeffs)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
