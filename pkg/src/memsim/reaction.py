"""Reaction term of the membrane equation and its linearization.

The equation's right-hand side couples every node through one scalar, the
domain integral of 1/(1 - u):

    f(u) = lam * g(u)^2 / (1 + alpha * I[u])^2,   I[u] = integral g(u),
    g(u) = 1 / (1 - u).

A truncated variant caps g at 1/delta to stay globally Lipschitz; the
untruncated form is the one integrated in time, with the singularity at
u = 1 reported through :class:`SingularityError` so callers can translate
it into a touchdown (quench) event.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, quadrature


class SingularityError(ArithmeticError):
    """The untruncated reciprocal 1/(1-u) was evaluated at max(u) >= 1."""


@dataclass(frozen=True)
class Params:
    """Scalar parameters of the equation.

    Attributes:
        lam: voltage parameter, >= 0.
        alpha: nonlocal coupling strength in front of the integral, > 0.
        delta_trunc: truncation level in (0, 1/2) for the capped reciprocal.
        quench_eps: touchdown threshold; max(u) >= 1 - quench_eps counts
            as quenched.
    """

    lam: float
    alpha: float = 1.0
    delta_trunc: float = 0.1
    quench_eps: float = 1e-2

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.delta_trunc < 0.5:
            raise ValueError(f"delta_trunc must lie in (0, 1/2), got {self.delta_trunc}")
        if not 0.0 < self.quench_eps < 1.0:
            raise ValueError(f"quench_eps must lie in (0, 1), got {self.quench_eps}")


def g_trunc(v, delta: float):
    """Reciprocal gap 1/(1-v), capped at 1/delta for v > 1 - delta.

    Continuous, nondecreasing, and bounded by 1/delta on all of R.
    Accepts scalars or arrays.
    """
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    capped = np.minimum(v, 1.0 - delta)
    out = 1.0 / (1.0 - capped)
    if np.isscalar(v):
        return float(out)
    return out


def _recip_gap(u: np.ndarray) -> np.ndarray:
    if float(np.max(u)) >= 1.0:
        raise SingularityError(f"max(u) = {float(np.max(u))} >= 1")
    return 1.0 / (1.0 - u)


def nonlocal_integral(grid: Grid, u: np.ndarray, params: Params,
                      truncated: bool = False) -> float:
    """Domain integral of the (possibly truncated) reciprocal gap.

    On radial grids the quadrature weights already carry the 2*pi*r area
    factor, so this is 2*pi * integral of r/(1-u) dr as required.
    """
    g = g_trunc(u, params.delta_trunc) if truncated else _recip_gap(u)
    return quadrature(grid, g)


def reaction(grid: Grid, u: np.ndarray, params: Params,
             truncated: bool = False) -> np.ndarray:
    """Pointwise reaction lam * g(u)^2 / (1 + alpha * I)^2.

    The nonlocal integral I is computed once and shared by all nodes.
    Nonnegative wherever defined; raises SingularityError in untruncated
    mode when max(u) >= 1.
    """
    g = g_trunc(u, params.delta_trunc) if truncated else _recip_gap(u)
    integral = quadrature(grid, g)
    return params.lam * g * g / (1.0 + params.alpha * integral) ** 2


@dataclass(frozen=True)
class RankOneJacobian:
    """Derivative of the reaction at a state psi: diag - rank-one coupling.

    apply(w) = diag * w - left * <right, w>_quad.  The rank-one part comes
    from differentiating the shared nonlocal integral; left is a positive
    multiple of right, which makes the full linearization symmetric in the
    quadrature-weighted inner product.
    """

    grid: Grid
    diag: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def apply(self, w: np.ndarray) -> np.ndarray:
        return self.diag * w - self.left * quadrature(self.grid, self.right * w)


def reaction_jacobian(grid: Grid, psi: np.ndarray, params: Params) -> RankOneJacobian:
    """Gateaux derivative of :func:`reaction` at psi as a RankOneJacobian.

    With g = 1/(1-psi) and I the nonlocal integral:
        diag  = 2 lam g^3 / (1 + alpha I)^2
        left  = 2 lam alpha g^2 / (1 + alpha I)^3
        right = g^2
    """
    g = _recip_gap(psi)
    integral = quadrature(grid, g)
    denom = 1.0 + params.alpha * integral
    g2 = g * g
    diag = 2.0 * params.lam * g2 * g / denom**2
    left = 2.0 * params.lam * params.alpha * g2 / denom**3
    return RankOneJacobian(grid, diag, left, g2)
