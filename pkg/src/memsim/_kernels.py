"""Hot numeric kernels with numba-compiled and plain numpy/scipy variants.

The two kernels that dominate runtime are the tridiagonal (Thomas) solve
driving 1D and radial time steps, and the masked 5-point conjugate-gradient
solve driving 2D time steps and Newton corrections.  Both exist in two
implementations:

* ``*_numba`` -- ``@njit``-compiled loops (default when numba imports).
* ``*_numpy`` -- vectorized numpy / LAPACK fallback.

Set the environment variable ``MEMSIM_NO_NUMBA=1`` to force the fallback
path (useful for debugging and for the benchmark in ``benchmarks/``).
Selection happens once at import time; both variants stay importable so
they can be compared directly.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.linalg import solve_banded

_DISABLE = os.environ.get("MEMSIM_NO_NUMBA", "").strip() not in ("", "0", "false")

try:
    if _DISABLE:
        raise ImportError("numba disabled by MEMSIM_NO_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return deco


def thomas_numpy(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray,
                 rhs: np.ndarray) -> np.ndarray:
    """Tridiagonal solve via LAPACK banded elimination.

    ``lower`` and ``upper`` have length ``n - 1``; no pivoting guarantees
    beyond what ``solve_banded`` provides, which is fine for the
    diffusion-type systems assembled here.
    """
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    return solve_banded((1, 1), ab, rhs, check_finite=False)


@njit(cache=True)
def thomas_numba(lower, diag, upper, rhs):  # pragma: no cover - jitted
    n = diag.shape[0]
    cp = np.empty(n)
    xp = np.empty(n)
    cp[0] = upper[0] / diag[0] if n > 1 else 0.0
    xp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i - 1] * cp[i - 1]
        cp[i] = upper[i] / denom if i < n - 1 else 0.0
        xp[i] = (rhs[i] - lower[i - 1] * xp[i - 1]) / denom
    x = np.empty(n)
    x[n - 1] = xp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = xp[i] - cp[i] * x[i + 1]
    return x


def _apply_2d_numpy(dcoef, lapcoef, mask, inv_hx2, inv_hy2, u):
    """Matvec for A u = dcoef*u + lapcoef*(-lap u) on masked interior nodes."""
    out = dcoef * u
    lap = np.zeros_like(u)
    lap[1:-1, :] += (u[2:, :] - 2.0 * u[1:-1, :] + u[:-2, :]) * inv_hx2
    lap[:, 1:-1] += (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) * inv_hy2
    out -= lapcoef * lap
    out[~mask] = 0.0
    return out


def cg_masked_numpy(dcoef, lapcoef, mask, inv_hx2, inv_hy2, b, x0,
                    tol, maxiter):
    """Conjugate gradients on the masked 5-point system, numpy path.

    Returns ``(x, relres, iters)``.  The operator must be symmetric
    positive definite on the masked subspace; a nonpositive curvature
    ``p.A p`` is reported through ``relres = inf`` so callers can raise.
    """
    x = np.where(mask, x0, 0.0)
    b = np.where(mask, b, 0.0)
    bnorm = np.sqrt(float(np.sum(b * b)))
    if bnorm == 0.0:
        return np.zeros_like(b), 0.0, 0
    r = b - _apply_2d_numpy(dcoef, lapcoef, mask, inv_hx2, inv_hy2, x)
    p = r.copy()
    rs = float(np.sum(r * r))
    it = 0
    while it < maxiter:
        if np.sqrt(rs) <= tol * bnorm:
            break
        ap = _apply_2d_numpy(dcoef, lapcoef, mask, inv_hx2, inv_hy2, p)
        pap = float(np.sum(p * ap))
        if pap <= 0.0:
            return x, np.inf, it
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.sum(r * r))
        p = r + (rs_new / rs) * p
        rs = rs_new
        it += 1
    return x, np.sqrt(rs) / bnorm, it


@njit(cache=True)
def cg_masked_numba(dcoef, lapcoef, mask, inv_hx2, inv_hy2, b, x0,
                    tol, maxiter):  # pragma: no cover - jitted
    nx, ny = b.shape
    x = np.zeros((nx, ny))
    bb = np.zeros((nx, ny))
    for i in range(nx):
        for j in range(ny):
            if mask[i, j]:
                x[i, j] = x0[i, j]
                bb[i, j] = b[i, j]
    bnorm = 0.0
    for i in range(nx):
        for j in range(ny):
            bnorm += bb[i, j] * bb[i, j]
    bnorm = np.sqrt(bnorm)
    if bnorm == 0.0:
        return np.zeros((nx, ny)), 0.0, 0

    r = np.zeros((nx, ny))
    p = np.zeros((nx, ny))
    ap = np.zeros((nx, ny))
    rs = 0.0
    for i in range(nx):
        for j in range(ny):
            if mask[i, j]:
                lap = -2.0 * (inv_hx2 + inv_hy2) * x[i, j]
                lap += (x[i - 1, j] + x[i + 1, j]) * inv_hx2
                lap += (x[i, j - 1] + x[i, j + 1]) * inv_hy2
                r[i, j] = bb[i, j] - (dcoef[i, j] * x[i, j] - lapcoef * lap)
                p[i, j] = r[i, j]
                rs += r[i, j] * r[i, j]
    it = 0
    while it < maxiter:
        if np.sqrt(rs) <= tol * bnorm:
            break
        for i in range(nx):
            for j in range(ny):
                if mask[i, j]:
                    lap = -2.0 * (inv_hx2 + inv_hy2) * p[i, j]
                    lap += (p[i - 1, j] + p[i + 1, j]) * inv_hx2
                    lap += (p[i, j - 1] + p[i, j + 1]) * inv_hy2
                    ap[i, j] = dcoef[i, j] * p[i, j] - lapcoef * lap
                else:
                    ap[i, j] = 0.0
        pap = 0.0
        for i in range(nx):
            for j in range(ny):
                pap += p[i, j] * ap[i, j]
        if pap <= 0.0:
            return x, np.inf, it
        alpha = rs / pap
        rs_new = 0.0
        for i in range(nx):
            for j in range(ny):
                if mask[i, j]:
                    x[i, j] += alpha * p[i, j]
                    r[i, j] -= alpha * ap[i, j]
                    rs_new += r[i, j] * r[i, j]
        beta = rs_new / rs
        for i in range(nx):
            for j in range(ny):
                if mask[i, j]:
                    p[i, j] = r[i, j] + beta * p[i, j]
        rs = rs_new
        it += 1
    return x, np.sqrt(rs) / bnorm, it


if HAS_NUMBA:
    thomas = thomas_numba
    cg_masked = cg_masked_numba
    BACKEND = "numba"
else:
    thomas = thomas_numpy
    cg_masked = cg_masked_numpy
    BACKEND = "numpy"
