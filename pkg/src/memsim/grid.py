"""Domains, finite-difference grids, discrete Laplacian, and quadrature.

Three geometries are supported: a 1D interval, a radially symmetric disk
(1D in the radius, with the 2*pi*r area weight folded into the quadrature),
and an axis-aligned rectangle.  A fourth constructor embeds a disk into a
square grid with a staircase Dirichlet boundary for non-radial 2D runs.

All grids are uniform.  Arrays inside a :class:`Grid` are frozen
(non-writeable) so grids can be shared across concurrent simulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._kernels import cg_masked, thomas

CG_TOL = 1e-10
CG_MAXITER = 50_000


class SolverConvergenceError(RuntimeError):
    """Iterative linear solve failed to reach tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class Interval:
    """1D segment [0, length]."""

    length: float

    dimension = 1

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"interval length must be positive, got {self.length}")

    def measure(self) -> float:
        return self.length


@dataclass(frozen=True)
class RadialDisk:
    """Disk of given radius, restricted to radially symmetric profiles u(r)."""

    radius: float

    dimension = 2

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")

    def measure(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle [0, lx] x [0, ly]."""

    lx: float
    ly: float

    dimension = 2

    def __post_init__(self):
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError(f"rectangle sides must be positive, got {self.lx}, {self.ly}")

    def measure(self) -> float:
        return self.lx * self.ly


Domain = Union[Interval, RadialDisk, Rectangle]

# Grid.kind values: "interval" and "radial" are 1D arrays in x or r;
# "rect" is a 2D array indexed [i, j] ~ (x_i, y_j).
_KINDS = ("interval", "radial", "rect")


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of a domain.

    Attributes:
        domain: the geometry this grid discretizes.
        kind: stencil family, one of "interval", "radial", "rect".
        axes: node coordinates per axis (1 or 2 arrays, strictly increasing).
        h: spacing per axis.
        interior_mask: True where the node carries an unknown; Dirichlet
            nodes (and nodes outside an embedded domain) are False.
        quad_weights: quadrature weight per node, in units of the domain
            measure; zero outside an embedded domain.
        embedded: True for staircase-boundary grids whose weights sum only
            approximates the domain measure (O(h) staircase error).
    """

    domain: Domain
    kind: str
    axes: tuple[np.ndarray, ...]
    h: tuple[float, ...]
    interior_mask: np.ndarray
    quad_weights: np.ndarray
    embedded: bool = False

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        for arr in (*self.axes, self.interior_mask, self.quad_weights):
            arr.setflags(write=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.interior_mask.shape

    @property
    def n_nodes(self) -> int:
        return self.interior_mask.size

    def zero_field(self) -> np.ndarray:
        return np.zeros(self.shape)

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcast to the grid shape."""
        if len(self.axes) == 1:
            return (self.axes[0],)
        return tuple(np.meshgrid(*self.axes, indexing="ij"))


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def build_grid(domain: Domain, n: int) -> Grid:
    """Uniform grid with n nodes per axis and composite-trapezoid weights.

    For the radial disk the weight at radius r_i is 2*pi*r_i times the 1D
    trapezoid factor, so quadrature approximates 2*pi * integral of r f(r) dr.
    The center node r=0 is interior (symmetry condition, not Dirichlet).
    """
    if n < 3:
        raise ValueError(f"need at least 3 nodes per axis, got n={n}")

    if isinstance(domain, Interval):
        h = domain.length / (n - 1)
        x = np.linspace(0.0, domain.length, n)
        mask = np.ones(n, dtype=bool)
        mask[0] = mask[-1] = False
        return Grid(domain, "interval", (x,), (h,), mask, _trapezoid_weights(n, h))

    if isinstance(domain, RadialDisk):
        h = domain.radius / (n - 1)
        r = np.linspace(0.0, domain.radius, n)
        mask = np.ones(n, dtype=bool)
        mask[-1] = False  # r = radius is Dirichlet; r = 0 stays interior
        w = 2.0 * math.pi * r * _trapezoid_weights(n, h)
        return Grid(domain, "radial", (r,), (h,), mask, w)

    if isinstance(domain, Rectangle):
        hx = domain.lx / (n - 1)
        hy = domain.ly / (n - 1)
        x = np.linspace(0.0, domain.lx, n)
        y = np.linspace(0.0, domain.ly, n)
        mask = np.zeros((n, n), dtype=bool)
        mask[1:-1, 1:-1] = True
        w = np.outer(_trapezoid_weights(n, hx), _trapezoid_weights(n, hy))
        return Grid(domain, "rect", (x, y), (hx, hy), mask, w)

    raise TypeError(f"unsupported domain {domain!r}")


def build_disk_grid(radius: float, n: int) -> Grid:
    """Disk embedded in a square grid over [-R, R]^2 (staircase boundary).

    Nodes strictly inside the disk are interior unknowns; everything else
    is pinned to zero.  Quadrature weights are the uniform cell area at
    inside nodes and zero outside, so their sum approximates pi*R^2 with a
    first-order staircase error.  Intended for qualitative non-radial runs;
    the radial grid is the quantitative tool on disks.
    """
    if n < 3:
        raise ValueError(f"need at least 3 nodes per axis, got n={n}")
    domain = RadialDisk(radius)
    h = 2.0 * radius / (n - 1)
    x = np.linspace(-radius, radius, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    inside = X**2 + Y**2 < radius**2 - 1e-12
    inside[0, :] = inside[-1, :] = inside[:, 0] = inside[:, -1] = False
    w = np.where(inside, h * h, 0.0)
    return Grid(domain, "rect", (x, x.copy()), (h, h), inside, w, embedded=True)


def validate_field(grid: Grid, f: np.ndarray) -> None:
    """Check shape, finiteness, and exact zeros on Dirichlet nodes."""
    if f.shape != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("field contains non-finite values")
    if np.any(f[~grid.interior_mask] != 0.0):
        raise ValueError("field is nonzero on Dirichlet boundary nodes")


def quadrature(grid: Grid, f: np.ndarray) -> float:
    """Integral of f over the domain: sum of quad_weights * f."""
    if f.shape != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")
    return float(np.sum(grid.quad_weights * f))


def weighted_norm(grid: Grid, f: np.ndarray) -> float:
    """Quadrature-weighted L2 norm sqrt(sum w_i f_i^2)."""
    if f.shape != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")
    return math.sqrt(float(np.sum(grid.quad_weights * f * f)))


def laplacian_apply(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Second-order discrete Laplacian; zero on non-interior nodes.

    Radial form is u_rr + u_r / r away from the center and the symmetry
    limit 4 (u_1 - u_0) / h^2 at r = 0.
    """
    validate_field(grid, f)
    out = grid.zero_field()

    if grid.kind == "interval":
        (h,) = grid.h
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    elif grid.kind == "radial":
        (h,) = grid.h
        r = grid.axes[0]
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h) \
            + (f[2:] - f[:-2]) / (2.0 * h * r[1:-1])
        out[0] = 4.0 * (f[1] - f[0]) / (h * h)
    else:
        hx, hy = grid.h
        out[1:-1, :] += (f[2:, :] - 2.0 * f[1:-1, :] + f[:-2, :]) / (hx * hx)
        out[:, 1:-1] += (f[:, 2:] - 2.0 * f[:, 1:-1] + f[:, :-2]) / (hy * hy)
        out[~grid.interior_mask] = 0.0
    return out


def _radial_tridiag(grid: Grid, dt: float):
    """Rows of (I - dt*lap) over unknowns [r_0 .. r_{n-2}] (center included)."""
    (h,) = grid.h
    r = grid.axes[0]
    m = grid.shape[0] - 1  # unknown count; last node is Dirichlet
    diag = np.empty(m)
    lower = np.empty(m - 1)
    upper = np.empty(m - 1)
    diag[0] = 1.0 + 4.0 * dt / (h * h)
    upper[0] = -4.0 * dt / (h * h)
    diag[1:] = 1.0 + 2.0 * dt / (h * h)
    lower[:] = -dt * (1.0 / (h * h) - 1.0 / (2.0 * h * r[1:m]))
    upper[1:] = -dt * (1.0 / (h * h) + 1.0 / (2.0 * h * r[1 : m - 1]))
    return lower, diag, upper


def implicit_solve(grid: Grid, dt: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (I - dt*lap) u = rhs with Dirichlet rows pinned to zero.

    1D and radial grids use direct tridiagonal elimination; rectangle grids
    use conjugate gradients to relative residual 1e-10 (the operator is
    symmetric positive definite for dt > 0).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if rhs.shape != grid.shape:
        raise ValueError(f"rhs shape {rhs.shape} does not match grid {grid.shape}")

    if grid.kind == "interval":
        (h,) = grid.h
        m = grid.shape[0] - 2
        c = dt / (h * h)
        diag = np.full(m, 1.0 + 2.0 * c)
        off = np.full(m - 1, -c)
        u = grid.zero_field()
        u[1:-1] = thomas(off, diag, off, np.ascontiguousarray(rhs[1:-1]))
        return u

    if grid.kind == "radial":
        lower, diag, upper = _radial_tridiag(grid, dt)
        u = grid.zero_field()
        u[:-1] = thomas(lower, diag, upper, np.ascontiguousarray(rhs[:-1]))
        return u

    dcoef = np.ones(grid.shape)
    b = np.where(grid.interior_mask, rhs, 0.0)
    x, relres, _ = cg_masked(dcoef, dt, grid.interior_mask,
                             1.0 / grid.h[0] ** 2, 1.0 / grid.h[1] ** 2,
                             b, np.zeros(grid.shape), CG_TOL, CG_MAXITER)
    if not relres <= CG_TOL:
        raise SolverConvergenceError("diffusion solve did not converge", relres)
    return x


def helmholtz_solve(grid: Grid, dcoef: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (dcoef - lap) u = rhs on interior nodes, zero elsewhere.

    Used by the steady-state Newton iteration, where dcoef is the (signed)
    local derivative row of the linearization.  Direct tridiagonal solve in
    1D/radial; conjugate gradients on rectangles, which requires the shifted
    operator to stay positive definite (it does on the stable branch).
    """
    if rhs.shape != grid.shape or dcoef.shape != grid.shape:
        raise ValueError("shape mismatch with grid")

    if grid.kind == "interval":
        (h,) = grid.h
        m = grid.shape[0] - 2
        c = 1.0 / (h * h)
        diag = dcoef[1:-1] + 2.0 * c
        off = np.full(m - 1, -c)
        u = grid.zero_field()
        u[1:-1] = thomas(off, diag, off, np.ascontiguousarray(rhs[1:-1]))
        return u

    if grid.kind == "radial":
        (h,) = grid.h
        r = grid.axes[0]
        m = grid.shape[0] - 1
        diag = np.empty(m)
        lower = np.empty(m - 1)
        upper = np.empty(m - 1)
        diag[0] = dcoef[0] + 4.0 / (h * h)
        upper[0] = -4.0 / (h * h)
        diag[1:] = dcoef[1:m] + 2.0 / (h * h)
        lower[:] = -(1.0 / (h * h) - 1.0 / (2.0 * h * r[1:m]))
        upper[1:] = -(1.0 / (h * h) + 1.0 / (2.0 * h * r[1 : m - 1]))
        u = grid.zero_field()
        u[:-1] = thomas(lower, diag, upper, np.ascontiguousarray(rhs[:-1]))
        return u

    b = np.where(grid.interior_mask, rhs, 0.0)
    x, relres, _ = cg_masked(np.ascontiguousarray(dcoef), 1.0, grid.interior_mask,
                             1.0 / grid.h[0] ** 2, 1.0 / grid.h[1] ** 2,
                             b, np.zeros(grid.shape), CG_TOL, CG_MAXITER)
    if not relres <= CG_TOL:
        raise SolverConvergenceError("shifted Poisson solve did not converge", relres)
    return x
