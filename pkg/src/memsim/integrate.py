"""Time integration of the membrane equation with touchdown detection.

The scheme is IMEX backward Euler: diffusion implicit, reaction explicit,
with an optional single Picard correction (re-evaluate the reaction at the
predicted state, re-solve).  The time step follows the gap to the
singularity, dt = c_adapt * (1 - max u)^2 clamped to [dt_min, dt_max], so
steps shrink quadratically as the membrane approaches touchdown.

A run terminates in one of three ways:

* Converged  -- sup-norm rate ||u(n+1) - u(n)||_inf / dt stayed below
  steady_tol for 5 consecutive steps;
* Quenched   -- max u crossed 1 - quench_eps (or the reaction hit the
  singularity outright, or the step controller collapsed below dt_min);
* TimedOut   -- t_max reached without either.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Union

import numpy as np

from .diagnostics import energy
from .grid import (Grid, Interval, RadialDisk, Rectangle, build_disk_grid,
                   build_grid, implicit_solve, validate_field, weighted_norm)
from .reaction import Params, SingularityError, nonlocal_integral, reaction

STEADY_STREAK = 5  # consecutive sub-tolerance steps that count as converged


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one simulation run."""

    grid: Grid
    params: Params
    u0: np.ndarray
    t_max: float
    dt_init: float = 0.05
    dt_max: float = 0.05
    dt_min: float = 1e-10
    c_adapt: float = 0.1
    steady_tol: float = 1e-8
    record_every: int = 10
    snapshot_times: tuple[float, ...] = ()
    picard: bool = True
    name: str = "custom"
    probe_index: tuple[int, ...] = (0,)

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError(
                f"need 0 < dt_min <= dt_init <= dt_max, got "
                f"{self.dt_min}, {self.dt_init}, {self.dt_max}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if not self.steady_tol > 0:
            raise ValueError(f"steady_tol must be positive, got {self.steady_tol}")
        if not self.c_adapt > 0:
            raise ValueError(f"c_adapt must be positive, got {self.c_adapt}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        validate_field(self.grid, self.u0)
        if float(np.max(self.u0)) >= 1.0:
            raise ValueError("initial data must satisfy max(u0) < 1")
        if any(t < 0 or t > self.t_max for t in self.snapshot_times):
            raise ValueError("snapshot times must lie in [0, t_max]")
        object.__setattr__(self, "snapshot_times",
                           tuple(sorted(self.snapshot_times)))

    def with_lambda(self, lam: float) -> "SimConfig":
        return replace(self, params=replace(self.params, lam=lam))


@dataclass(frozen=True)
class TrajectorySample:
    """Diagnostics recorded along a trajectory."""

    t: float
    max_u: float
    energy: float
    l2_ut: float
    nonlocal_I: float
    dt_used: float


@dataclass(frozen=True)
class Converged:
    steady: np.ndarray
    t_reached: float


@dataclass(frozen=True)
class Quenched:
    t_quench: float
    peak_location: int  # flat index into the field array
    by_dt_collapse: bool = False
    final: np.ndarray | None = None


@dataclass(frozen=True)
class TimedOut:
    final: np.ndarray


SimOutcome = Union[Converged, Quenched, TimedOut]


class SimResult(NamedTuple):
    outcome: SimOutcome
    samples: list[TrajectorySample]
    snapshots: list[tuple[float, np.ndarray]]


def step(u: np.ndarray, dt: float, grid: Grid, params: Params,
         picard: bool = True) -> np.ndarray:
    """One IMEX backward-Euler step from u.

    u+ solves (I - dt*lap) u+ = u + dt*f(u); with picard the reaction is
    re-evaluated at u+ and the solve repeated once from the same u.
    SingularityError from the reaction propagates (quench signal).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    f0 = reaction(grid, u, params)
    u1 = implicit_solve(grid, dt, u + dt * f0)
    if picard:
        f1 = reaction(grid, u1, params)
        u1 = implicit_solve(grid, dt, u + dt * f1)
    return u1


def _energy_for_sample(grid: Grid, u: np.ndarray, params: Params) -> tuple[float, float]:
    return energy(grid, u, params), nonlocal_integral(grid, u, params)


def run(config: SimConfig) -> SimResult:
    """Integrate until convergence, touchdown, or t_max."""
    grid, params = config.grid, config.params
    u = config.u0.astype(float).copy()
    t = 0.0
    n_steps = 0
    steady_streak = 0
    samples: list[TrajectorySample] = []
    snapshots: list[tuple[float, np.ndarray]] = []
    pending = list(config.snapshot_times)

    e0, i0 = _energy_for_sample(grid, u, params)
    samples.append(TrajectorySample(0.0, float(np.max(u)), e0, 0.0, i0, 0.0))
    while pending and pending[0] <= 1e-14:
        snapshots.append((0.0, u.copy()))
        pending.pop(0)

    while t < config.t_max * (1.0 - 1e-14):
        max_u = float(np.max(u))
        target = config.c_adapt * (1.0 - max_u) ** 2
        if target < config.dt_min:
            return SimResult(
                Quenched(t, int(np.argmax(u)), by_dt_collapse=True, final=u),
                samples, snapshots)
        dt = min(target, config.dt_max, config.t_max - t)
        if n_steps == 0:
            dt = min(dt, config.dt_init)
        if pending:
            dt = min(dt, pending[0] - t)
        dt = max(dt, config.dt_min)

        try:
            u_new = step(u, dt, grid, params, config.picard)
        except SingularityError:
            sample = _terminal_sample(grid, u, params, t, dt)
            samples.append(sample)
            return SimResult(Quenched(t + dt, int(np.argmax(u)), final=u),
                             samples, snapshots)

        t_new = t + dt
        n_steps += 1
        rate = float(np.max(np.abs(u_new - u))) / dt
        l2_ut = weighted_norm(grid, (u_new - u) / dt)
        max_new = float(np.max(u_new))

        hit_snapshot = bool(pending) and t_new >= pending[0] - 1e-12
        if hit_snapshot:
            t_new = pending.pop(0)  # pin the accumulated time to the target
            snapshots.append((t_new, u_new.copy()))

        if max_new >= 1.0 - params.quench_eps:
            state = u_new if max_new < 1.0 else u
            sample = _terminal_sample(grid, state, params, t_new, dt, l2_ut)
            samples.append(sample)
            return SimResult(
                Quenched(t_new, int(np.argmax(u_new)), final=state),
                samples, snapshots)

        record = (n_steps % config.record_every == 0) or hit_snapshot
        if record:
            e, integ = _energy_for_sample(grid, u_new, params)
            samples.append(TrajectorySample(t_new, max_new, e, l2_ut, integ, dt))

        if rate < config.steady_tol:
            steady_streak += 1
            if steady_streak >= STEADY_STREAK:
                if not record:
                    e, integ = _energy_for_sample(grid, u_new, params)
                    samples.append(
                        TrajectorySample(t_new, max_new, e, l2_ut, integ, dt))
                return SimResult(Converged(u_new, t_new), samples, snapshots)
        else:
            steady_streak = 0

        u = u_new
        t = t_new

    if samples[-1].t < t:
        e, integ = _energy_for_sample(grid, u, params)
        samples.append(TrajectorySample(
            t, float(np.max(u)), e,
            samples[-1].l2_ut if samples else 0.0, integ,
            samples[-1].dt_used if samples else 0.0))
    return SimResult(TimedOut(u), samples, snapshots)


def _terminal_sample(grid, state, params, t, dt, l2_ut=0.0) -> TrajectorySample:
    e, integ = _energy_for_sample(grid, state, params)
    return TrajectorySample(t, float(np.max(state)), e, l2_ut, integ, dt)


def probe_value(config: SimConfig, u: np.ndarray) -> float:
    """Field value at the configured probe node."""
    return float(u[config.probe_index])


# ---------------------------------------------------------------------------
# Experiment presets
# ---------------------------------------------------------------------------

PRESET_NAMES = ("1d-unit", "disk-radial", "disk-cartesian", "square-unit")

_PRESET_LAMBDA = {
    "1d-unit": 8.53,
    "disk-radial": 21.0,
    "disk-cartesian": 20.0,
    "square-unit": 10.0,
}

_PRESET_N = {
    "1d-unit": 201,
    "disk-radial": 201,
    "disk-cartesian": 65,
    "square-unit": 51,
}

_PRESET_TMAX = {
    "1d-unit": 10.0,
    "disk-radial": 20.0,
    "disk-cartesian": 20.0,
    "square-unit": 10.0,
}

# Time-step caps and convergence detection per scenario.  The 1D unit
# interval hosts the razor-thin reference experiments 0.1% from the fold,
# so it steps an order of magnitude finer and detects steadiness at the
# plateau-separating rate 1e-3 (quench-bound trajectories near the fold
# never dip below ~5e-3 in sup-norm rate, settling ones fall through it).
# The 2D scenarios have percent-scale margins and use the strict default.
_PRESET_STEPPING = {
    "1d-unit": {"dt_max": 0.005, "dt_init": 0.005, "c_adapt": 0.02,
                "steady_tol": 1e-3},
    "disk-radial": {"dt_max": 0.01, "dt_init": 0.01, "c_adapt": 0.05,
                    "steady_tol": 1e-8},
    "disk-cartesian": {"dt_max": 0.01, "dt_init": 0.01, "c_adapt": 0.05,
                       "steady_tol": 1e-8},
    "square-unit": {"dt_max": 0.01, "dt_init": 0.01, "c_adapt": 0.05,
                    "steady_tol": 1e-8},
}


def _bump_initial(grid: Grid) -> np.ndarray:
    """Non-radial initial membrane shape 100 (1-x^2-y^2)^3 x^2 y^2 on the disk."""
    X, Y = grid.meshgrid()
    r2 = X**2 + Y**2
    u0 = 100.0 * (1.0 - r2) ** 3 * X**2 * Y**2
    u0[~grid.interior_mask] = 0.0
    return u0


def make_preset(name: str, lam: float | None = None, n: int | None = None,
                **overrides) -> SimConfig:
    """Build one of the named experiment configurations.

    lam defaults to the preset's convergent reference voltage; n and any
    SimConfig field can be overridden.
    """
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    lam = _PRESET_LAMBDA[name] if lam is None else lam
    n = _PRESET_N[name] if n is None else n
    params = Params(lam=lam)
    if "params" in overrides:
        params = overrides.pop("params")
        params = replace(params, lam=lam)

    if name == "1d-unit":
        grid = build_grid(Interval(1.0), n)
        u0 = grid.zero_field()
        probe = (int(round(0.5 * (n - 1))),)
    elif name == "disk-radial":
        grid = build_grid(RadialDisk(1.0), n)
        u0 = grid.zero_field()
        probe = (0,)
    elif name == "disk-cartesian":
        grid = build_disk_grid(1.0, n)
        u0 = _bump_initial(grid)
        c = (n - 1) // 2
        probe = (c, c)
    else:  # square-unit
        grid = build_grid(Rectangle(1.0, 1.0), n)
        u0 = grid.zero_field()
        c = (n - 1) // 2
        probe = (c, c)

    cfg = dict(
        grid=grid, params=params, u0=u0, t_max=_PRESET_TMAX[name],
        name=name, probe_index=probe,
    )
    cfg.update(_PRESET_STEPPING[name])
    cfg.update(overrides)
    return SimConfig(**cfg)


def presets() -> list[SimConfig]:
    """All named experiment configurations with their reference voltages."""
    return [make_preset(name) for name in PRESET_NAMES]
