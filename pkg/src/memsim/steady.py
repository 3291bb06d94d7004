"""Steady membrane profiles by damped Newton, and continuation in voltage.

The steady problem is -lap(phi) = f(phi) with homogeneous Dirichlet data.
Each Newton system couples a sparse shifted Laplacian with a rank-one term
coming from the shared nonlocal integral; the solve factors the sparse part
and applies the Sherman-Morrison identity for the rank-one correction, so
no dense matrix is ever formed.

Continuation walks an increasing voltage list, warm-starting each solve
from the previous profile.  Past the fold no solution exists: Newton stops
converging, the step bisects down to a floor, and the last success is the
fold estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .grid import (CG_MAXITER, CG_TOL, Grid, SolverConvergenceError,
                   helmholtz_solve, laplacian_apply, quadrature, weighted_norm)
from .reaction import Params, RankOneJacobian, reaction, reaction_jacobian

NEWTON_TOL = 1e-10
NEWTON_MAX_ITERS = 50
DAMPING_FLOOR = 2.0**-20
MAX_U_GUARD = 1.0 - 1e-6


class NewtonError(RuntimeError):
    pass


class NoConvergence(NewtonError):
    def __init__(self, residual_norm: float, iters: int):
        super().__init__(
            f"Newton did not converge in {iters} iterations "
            f"(residual {residual_norm:.3e})")
        self.residual_norm = residual_norm
        self.iters = iters


class StepCollapse(NewtonError):
    """Damping reached the floor; typically signals proximity to the fold."""

    def __init__(self, residual_norm: float, iters: int):
        super().__init__(
            f"Newton line search collapsed at iteration {iters} "
            f"(residual {residual_norm:.3e})")
        self.residual_norm = residual_norm
        self.iters = iters


@dataclass(frozen=True)
class BranchPoint:
    """One converged point of the minimal steady branch."""

    lam: float
    phi: np.ndarray
    max_phi: float
    newton_iters: int
    residual_norm: float
    residual_history: tuple[float, ...] = ()


class ContinuationResult(NamedTuple):
    points: list[BranchPoint]
    fold_lambda: float | None  # last reachable voltage when a target failed


def residual(grid: Grid, phi: np.ndarray, params: Params) -> np.ndarray:
    """Steady-state defect -lap(phi) - f(phi); zero iff phi is steady."""
    r = -laplacian_apply(grid, phi) - reaction(grid, phi, params)
    r[~grid.interior_mask] = 0.0
    return r


def _solve_linearized(grid: Grid, jac: RankOneJacobian, rhs: np.ndarray) -> np.ndarray:
    """Solve (-lap - diag + rank-one) delta = rhs via Sherman-Morrison.

    The sparse part S = -lap - diag is factored (tridiagonal) or solved
    iteratively (2D); the rank-one term left * <right, .>_quad is folded in
    with two S-solves.  Approaching the fold on 2D grids, S can turn
    indefinite while the full linearization is still positive definite
    (the rank-one term is a positive correction, left being a positive
    multiple of right); conjugate gradients on the full operator covers
    that regime.
    """
    try:
        z = helmholtz_solve(grid, -jac.diag, rhs)
        y = helmholtz_solve(grid, -jac.diag, jac.left)
    except SolverConvergenceError:
        return _cg_full_jacobian(grid, jac, rhs)
    denom = 1.0 + quadrature(grid, jac.right * y)
    coef = quadrature(grid, jac.right * z) / denom
    return z - coef * y


def _cg_full_jacobian(grid: Grid, jac: RankOneJacobian, rhs: np.ndarray) -> np.ndarray:
    """CG on the full linearization; symmetric since left = const * right."""
    mask = grid.interior_mask
    hx2 = 1.0 / grid.h[0] ** 2
    hy2 = 1.0 / grid.h[1] ** 2

    def matvec(v):
        lap = np.zeros_like(v)
        lap[1:-1, :] += (v[2:, :] - 2.0 * v[1:-1, :] + v[:-2, :]) * hx2
        lap[:, 1:-1] += (v[:, 2:] - 2.0 * v[:, 1:-1] + v[:, :-2]) * hy2
        out = -lap - jac.diag * v + jac.left * quadrature(grid, jac.right * v)
        return np.where(mask, out, 0.0)

    b = np.where(mask, rhs, 0.0)
    bnorm = float(np.sqrt(np.sum(b * b)))
    if bnorm == 0.0:
        return np.zeros_like(b)
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(np.sum(r * r))
    for _ in range(CG_MAXITER):
        if np.sqrt(rs) <= CG_TOL * bnorm:
            return x
        ap = matvec(p)
        pap = float(np.sum(p * ap))
        if pap <= 0.0:
            raise SolverConvergenceError(
                "linearized steady operator is not positive definite", np.inf)
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.sum(r * r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise SolverConvergenceError("linearized solve did not converge",
                                 float(np.sqrt(rs)) / bnorm)


def newton_solve(grid: Grid, phi0: np.ndarray, params: Params,
                 tol: float = NEWTON_TOL,
                 max_iters: int = NEWTON_MAX_ITERS) -> BranchPoint:
    """Damped Newton from phi0; returns a BranchPoint or raises.

    Backtracking halves the step until the weighted-L2 residual decreases
    and max(phi) stays below 1 - 1e-6; NoConvergence after max_iters,
    StepCollapse when the damping reaches 2^-20.
    """
    if float(np.max(phi0)) >= 1.0:
        raise ValueError("initial guess must satisfy max(phi0) < 1")
    phi = phi0.astype(float).copy()
    r = residual(grid, phi, params)
    rnorm = weighted_norm(grid, r)
    history = [rnorm]
    iters = 0
    while rnorm > tol:
        if iters >= max_iters:
            raise NoConvergence(rnorm, iters)
        jac = reaction_jacobian(grid, phi, params)
        try:
            delta = _solve_linearized(grid, jac, -r)
        except SolverConvergenceError:
            # past the fold the linearization loses definiteness
            raise NoConvergence(rnorm, iters) from None
        s = 1.0
        while True:
            trial = phi + s * delta
            if float(np.max(trial)) < MAX_U_GUARD:
                r_trial = residual(grid, trial, params)
                rnorm_trial = weighted_norm(grid, r_trial)
                if rnorm_trial < rnorm:
                    break
            s *= 0.5
            if s < DAMPING_FLOOR:
                raise StepCollapse(rnorm, iters)
        phi, r, rnorm = trial, r_trial, rnorm_trial
        history.append(rnorm)
        iters += 1
    return BranchPoint(params.lam, phi, float(np.max(phi)), iters, rnorm,
                       tuple(history))


LAMBDA_STEP_FLOOR = 1e-4


def continuation(grid: Grid, lambda_targets: list[float],
                 params_template: Params,
                 tol: float = NEWTON_TOL,
                 max_iters: int = NEWTON_MAX_ITERS) -> ContinuationResult:
    """Trace the minimal branch over increasing voltages with warm starts.

    On a failed target the voltage step bisects down to a 1e-4 floor; the
    last reachable voltage is reported as the fold estimate and later
    targets are abandoned (no steady state exists past the fold).
    """
    targets = list(lambda_targets)
    if any(b <= a for a, b in zip(targets, targets[1:])):
        raise ValueError("lambda targets must be strictly increasing")

    points: list[BranchPoint] = []
    phi = grid.zero_field()
    lam_ok = 0.0
    for target in targets:
        point, last = _advance(grid, phi, lam_ok, target, params_template,
                               tol, max_iters)
        if point is None:
            # fold passed: report the deepest voltage Newton still reached
            fold = last.lam if last is not None else lam_ok
            return ContinuationResult(points, fold)
        points.append(point)
        phi = point.phi
        lam_ok = point.lam
    return ContinuationResult(points, None)


def _advance(grid, phi, lam_from, lam_to, params_template, tol, max_iters):
    """March from lam_from to lam_to, bisecting the step on Newton failure.

    Returns (target_point, last_success); target_point is None when the
    voltage step collapsed below the floor before reaching lam_to.
    """
    lam_cur = lam_from
    last = None
    while True:
        lam_try = lam_to
        while True:
            try:
                point = newton_solve(grid, phi,
                                     replace(params_template, lam=lam_try),
                                     tol, max_iters)
                break
            except NewtonError:
                if lam_try - lam_cur <= LAMBDA_STEP_FLOOR:
                    return None, last
                lam_try = 0.5 * (lam_cur + lam_try)
        phi = point.phi
        lam_cur = lam_try
        last = point
        if lam_cur >= lam_to:
            return point, last
