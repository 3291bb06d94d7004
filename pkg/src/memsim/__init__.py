"""memsim: simulation toolkit for a voltage-driven elastic membrane whose
electrostatic load couples every point through a shared series capacitor.

The dynamics solved here are a nonlocal reaction-diffusion equation for the
membrane displacement u on an interval, disk, or rectangle, with touchdown
(u reaching the insulating gap) detected in finite time above a critical
voltage and convergence to a steady profile below it.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND, HAS_NUMBA
from .diagnostics import (Algebraic, DecayFit, Exponential, InsufficientData,
                          energy, fit_decay, l2_distance, nonexistence_bound)
from .grid import (Domain, Grid, Interval, RadialDisk, Rectangle,
                   SolverConvergenceError, build_disk_grid, build_grid,
                   implicit_solve, laplacian_apply, quadrature, validate_field,
                   weighted_norm)
from .integrate import (Converged, Quenched, SimConfig, SimResult, TimedOut,
                        TrajectorySample, make_preset, presets, probe_value,
                        run, step)
from .reaction import (Params, RankOneJacobian, SingularityError, g_trunc,
                       nonlocal_integral, reaction, reaction_jacobian)
from .search import (InvalidBracket, LambdaClassification, Verdict,
                     bisect_lambda_star, classify)
from .steady import (BranchPoint, ContinuationResult, NewtonError,
                     NoConvergence, StepCollapse, continuation, newton_solve,
                     residual)

__all__ = [
    "Algebraic", "BACKEND", "BranchPoint", "ContinuationResult", "Converged",
    "DecayFit", "Domain", "Exponential", "Grid", "HAS_NUMBA",
    "InsufficientData", "Interval", "InvalidBracket", "LambdaClassification",
    "NewtonError", "NoConvergence", "Params", "Quenched", "RadialDisk",
    "RankOneJacobian", "Rectangle", "SimConfig", "SimResult",
    "SingularityError", "SolverConvergenceError", "StepCollapse", "TimedOut",
    "TrajectorySample", "Verdict", "bisect_lambda_star", "build_disk_grid",
    "build_grid", "classify", "continuation", "energy", "fit_decay",
    "g_trunc", "implicit_solve", "l2_distance", "laplacian_apply",
    "make_preset", "newton_solve", "nonexistence_bound", "nonlocal_integral",
    "presets", "probe_value", "quadrature", "reaction", "reaction_jacobian",
    "residual", "run", "step", "validate_field", "weighted_norm",
]
