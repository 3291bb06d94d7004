"""Energy functional, norms, decay-rate fitting, and the blow-up voltage bound.

The membrane dynamics form a gradient flow for

    E(u) = 1/2 * integral |grad u|^2  +  (lam/alpha) / (1 + alpha * I[u]),

which is nonincreasing along trajectories with dE/dt = -integral u_t^2.
The distance to the steady state decays either exponentially or like an
algebraic power of time; :func:`fit_decay` fits both models to recorded
distances and picks the better one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .grid import Domain, Grid, Interval, RadialDisk, weighted_norm
from .reaction import Params, nonlocal_integral


class InsufficientData(ValueError):
    """Too few usable samples in the requested fit window."""


def energy(grid: Grid, u: np.ndarray, params: Params) -> float:
    """Lyapunov energy of a state: gradient part plus nonlocal capacitor part.

    The gradient term uses forward differences on cells; on the radial grid
    it is (1/2) * 2*pi * integral r u_r^2 dr.  Both summands are
    nonnegative for admissible u (max u < 1), so E >= 0.
    """
    integral = nonlocal_integral(grid, u, params)  # raises on max(u) >= 1
    nonlocal_part = (params.lam / params.alpha) / (1.0 + params.alpha * integral)

    if grid.kind == "interval":
        (h,) = grid.h
        du = np.diff(u) / h
        grad = 0.5 * float(np.sum(du * du)) * h
    elif grid.kind == "radial":
        (h,) = grid.h
        r = grid.axes[0]
        rmid = 0.5 * (r[1:] + r[:-1])
        du = np.diff(u) / h
        grad = 0.5 * 2.0 * math.pi * float(np.sum(rmid * du * du)) * h
    else:
        hx, hy = grid.h
        dux = np.diff(u, axis=0) / hx
        duy = np.diff(u, axis=1) / hy
        grad = 0.5 * (float(np.sum(dux * dux)) + float(np.sum(duy * duy))) * hx * hy
    return grad + nonlocal_part


def l2_distance(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """Quadrature-weighted L2 distance between two fields on one grid."""
    if a.shape != grid.shape or b.shape != grid.shape:
        raise ValueError("fields do not match grid shape")
    return weighted_norm(grid, a - b)


@dataclass(frozen=True)
class Exponential:
    rate: float
    amplitude: float


@dataclass(frozen=True)
class Algebraic:
    exponent: float
    amplitude: float


DecayModel = Union[Exponential, Algebraic]


@dataclass(frozen=True)
class DecayFit:
    """Fitted decay of the distance to equilibrium.

    theta_implied is the gradient-inequality exponent consistent with the
    chosen model: 1/2 for exponential decay, p/(1+2p) for an algebraic
    decay (1+t)^(-p).  converged_exactly flags all-zero distances (nothing
    to fit); model is None in that case.
    """

    model: DecayModel | None
    r_squared: float
    window: tuple[float, float]
    theta_implied: float
    converged_exactly: bool = False


DISTANCE_FLOOR = 1e-12


def _lstsq_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit y = a + b x; returns (a, b, r_squared)."""
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-28 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), r2


def fit_decay(samples: list[tuple[float, float]],
              model_selection: Literal["auto", "exp", "alg"] = "auto",
              window: tuple[float, float] | None = None) -> DecayFit:
    """Fit exponential and/or algebraic decay to (t, distance) samples.

    Exponential fits log d against t; algebraic fits log d against
    log(1 + t).  In auto mode the model with higher r-squared wins.
    Distances at or below the floating-point floor (1e-12) are excluded;
    with no explicit window, the last 60% of the usable samples are fitted
    (skips the initial transient).
    """
    pts = [(float(t), float(d)) for t, d in samples]
    if window is not None:
        lo, hi = window
        pts = [(t, d) for t, d in pts if lo <= t <= hi]
    if pts and all(d == 0.0 for _, d in pts):
        return DecayFit(None, 1.0, window or (pts[0][0], pts[-1][0]),
                        0.5, converged_exactly=True)
    pts = [(t, d) for t, d in pts if d > DISTANCE_FLOOR]
    if window is None and len(pts) >= 10:
        pts = pts[int(math.floor(0.4 * len(pts))):]
    if len(pts) < 10:
        raise InsufficientData(
            f"need >= 10 positive-distance samples in window, have {len(pts)}")

    t = np.array([p[0] for p in pts])
    d = np.array([p[1] for p in pts])
    logd = np.log(d)
    span = (float(t[0]), float(t[-1]))

    a_exp, b_exp, r2_exp = _lstsq_line(t, logd)
    a_alg, b_alg, r2_alg = _lstsq_line(np.log1p(t), logd)

    fits = {
        "exp": DecayFit(Exponential(rate=-b_exp, amplitude=math.exp(a_exp)),
                        r2_exp, span, 0.5),
        "alg": None,
    }
    p = -b_alg
    theta = p / (1.0 + 2.0 * p) if p > 0 else 0.0
    fits["alg"] = DecayFit(Algebraic(exponent=p, amplitude=math.exp(a_alg)),
                           r2_alg, span, theta)

    if model_selection == "exp":
        return fits["exp"]
    if model_selection == "alg":
        return fits["alg"]
    return fits["exp"] if r2_exp >= r2_alg else fits["alg"]


def nonexistence_bound(domain: Domain, beta: float | Literal["auto"] = "auto") -> float:
    """Voltage above which no steady state (hence no bounded global solution)
    exists on a strictly star-shaped 2D domain.

    The bound is N (1 + |O|)^4 / (2 beta |O|^2) with N = 2, where beta is
    the star-shape constant min over the boundary of nu(x).x / |boundary|.
    For a disk beta = 1/(2 pi), which reduces to the closed form
    N^2 (1 + |O|)^4 / (2 |O|) on the unit disk.  Interval domains are
    rejected (the estimate needs N >= 2).
    """
    if isinstance(domain, Interval):
        raise ValueError("nonexistence bound requires a 2D domain")
    if beta == "auto":
        if isinstance(domain, RadialDisk):
            beta_val = 1.0 / (2.0 * math.pi)
        else:
            raise ValueError("beta must be supplied for non-disk domains")
    else:
        beta_val = float(beta)
        if not beta_val > 0:
            raise ValueError(f"beta must be positive, got {beta}")
    measure = domain.measure()
    n_dim = 2.0
    return n_dim * (1.0 + measure) ** 4 / (2.0 * beta_val * measure**2)
