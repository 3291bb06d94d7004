"""Command-line interface: presets, config files, and structured outputs.

Subcommands: run | sweep | bisect | steady | rate | bound | presets.

Configuration is flat key=value text with one section per concern
([domain], [equation], [time], [output]); every key has a default, a
--preset fills domain/time defaults for the named experiment, and CLI
flags override file values.  Each command writes its artifacts plus a
summary.json manifest into the output directory (--outdir, else
$MEMSIM_OUTDIR, else ./memsim_out).

CSV schemas (exact headers):
    trajectory.csv   t,max_u,energy,l2_ut,nonlocal_I,dt
    snapshot (1D)    x,u
    snapshot (2D)    x,y,u
    sweep.csv        lambda,t,probe_value

Exit codes for `run`: 0 converged or timed out, 2 quenched, 1 bad config.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import Exponential, fit_decay, l2_distance, nonexistence_bound
from .grid import Interval, RadialDisk, Rectangle
from .integrate import (PRESET_NAMES, Converged, Quenched, SimConfig,
                        make_preset, presets, probe_value, run)
from .reaction import Params
from .search import InvalidBracket, bisect_lambda_star
from .steady import continuation

_PRESET_PROBE = {
    "1d-unit": "0.5",
    "disk-radial": "0.0",
    "disk-cartesian": "0.0,0.0",
    "square-unit": "0.5,0.5",
}

_PRESET_DOMAIN = {
    "1d-unit": ("interval", {"length": "1.0"}),
    "disk-radial": ("disk-radial", {"radius": "1.0"}),
    "disk-cartesian": ("disk-cartesian", {"radius": "1.0"}),
    "square-unit": ("rectangle", {"lx": "1.0", "ly": "1.0"}),
}

_CONFIG_DEFAULTS = {
    "domain": {"kind": "interval", "length": "1.0", "radius": "1.0",
               "lx": "1.0", "ly": "1.0", "n": "201"},
    "equation": {"lambda": "1.0", "alpha": "1.0", "delta_trunc": "0.1",
                 "quench_eps": "0.01"},
    "time": {"dt_init": "0.05", "dt_max": "0.05", "dt_min": "1e-10",
             "c_adapt": "0.1", "t_max": "10.0", "steady_tol": "1e-08",
             "record_every": "10", "snapshot_times": "", "picard": "true"},
    "output": {"probe": "0.5", "preset": ""},
}


class ConfigError(ValueError):
    pass


def default_config() -> dict[str, dict[str, str]]:
    return {sec: dict(kv) for sec, kv in _CONFIG_DEFAULTS.items()}


def preset_config(name: str) -> dict[str, dict[str, str]]:
    """Config dict filled with a named experiment's defaults."""
    cfg = default_config()
    base = make_preset(name)
    kind, geom = _PRESET_DOMAIN[name]
    cfg["domain"]["kind"] = kind
    cfg["domain"].update(geom)
    cfg["domain"]["n"] = repr(base.grid.shape[0])
    cfg["equation"]["lambda"] = repr(base.params.lam)
    for key in ("dt_init", "dt_max", "dt_min", "c_adapt", "t_max",
                "steady_tol"):
        cfg["time"][key] = repr(float(getattr(base, key)))
    cfg["time"]["record_every"] = repr(base.record_every)
    cfg["time"]["picard"] = "true" if base.picard else "false"
    cfg["output"]["probe"] = _PRESET_PROBE[name]
    cfg["output"]["preset"] = name
    return cfg


def parse_config(text: str) -> dict[str, dict[str, str]]:
    """Parse INI-style config text onto the defaults."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    cfg = default_config()
    for section in parser.sections():
        if section not in cfg:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in parser.items(section):
            if key not in cfg[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            cfg[section][key] = value.strip()
    preset = cfg["output"].get("preset", "")
    if preset:
        merged = preset_config(preset)
        for section in parser.sections():
            for key, value in parser.items(section):
                merged[section][key] = value.strip()
        cfg = merged
    return cfg


def serialize_config(cfg: dict[str, dict[str, str]]) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    for section, kv in cfg.items():
        parser[section] = kv
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def _as_float(cfg, section, key) -> float:
    raw = cfg[section][key]
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from exc


def _as_int(cfg, section, key) -> int:
    raw = cfg[section][key]
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not an integer: {raw!r}") from exc


def _as_bool(cfg, section, key) -> bool:
    raw = cfg[section][key].lower()
    if raw in ("true", "yes", "1", "on"):
        return True
    if raw in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: not a boolean: {raw!r}")


def _probe_index(grid, probe_str: str) -> tuple[int, ...]:
    coords = [float(c) for c in probe_str.split(",") if c.strip() != ""]
    if len(coords) != len(grid.axes):
        raise ConfigError(
            f"probe needs {len(grid.axes)} coordinate(s), got {probe_str!r}")
    return tuple(int(np.argmin(np.abs(axis - c)))
                 for axis, c in zip(grid.axes, coords))


def build_sim_config(cfg: dict[str, dict[str, str]]) -> SimConfig:
    """Construct the simulation object a config dict describes."""
    from .grid import build_disk_grid, build_grid

    kind = cfg["domain"]["kind"]
    n = _as_int(cfg, "domain", "n")
    try:
        if kind == "interval":
            grid = build_grid(Interval(_as_float(cfg, "domain", "length")), n)
        elif kind == "disk-radial":
            grid = build_grid(RadialDisk(_as_float(cfg, "domain", "radius")), n)
        elif kind == "disk-cartesian":
            grid = build_disk_grid(_as_float(cfg, "domain", "radius"), n)
        elif kind == "rectangle":
            grid = build_grid(Rectangle(_as_float(cfg, "domain", "lx"),
                                        _as_float(cfg, "domain", "ly")), n)
        else:
            raise ConfigError(f"unknown domain kind {kind!r}")

        params = Params(
            lam=_as_float(cfg, "equation", "lambda"),
            alpha=_as_float(cfg, "equation", "alpha"),
            delta_trunc=_as_float(cfg, "equation", "delta_trunc"),
            quench_eps=_as_float(cfg, "equation", "quench_eps"),
        )

        preset = cfg["output"].get("preset", "")
        if preset == "disk-cartesian":
            from .integrate import _bump_initial
            u0 = _bump_initial(grid)
        else:
            u0 = grid.zero_field()

        snap_raw = cfg["time"]["snapshot_times"].strip()
        snaps = tuple(float(s) for s in snap_raw.split(",") if s.strip() != "")

        return SimConfig(
            grid=grid,
            params=params,
            u0=u0,
            t_max=_as_float(cfg, "time", "t_max"),
            dt_init=_as_float(cfg, "time", "dt_init"),
            dt_max=_as_float(cfg, "time", "dt_max"),
            dt_min=_as_float(cfg, "time", "dt_min"),
            c_adapt=_as_float(cfg, "time", "c_adapt"),
            steady_tol=_as_float(cfg, "time", "steady_tol"),
            record_every=_as_int(cfg, "time", "record_every"),
            snapshot_times=snaps,
            picard=_as_bool(cfg, "time", "picard"),
            name=preset or "custom",
            probe_index=_probe_index(grid, cfg["output"]["probe"]),
        )
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    """Shortest round-trip decimal for a float."""
    return repr(float(x))


def _outdir(args) -> Path:
    path = args.outdir or os.environ.get("MEMSIM_OUTDIR") or "memsim_out"
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_trajectory(path: Path, samples) -> None:
    _write_csv(path, "t,max_u,energy,l2_ut,nonlocal_I,dt",
               ((s.t, s.max_u, s.energy, s.l2_ut, s.nonlocal_I, s.dt_used)
                for s in samples))


def _snapshot_rows(grid, u):
    if len(grid.axes) == 1:
        x = grid.axes[0]
        return ((x[i], u[i]) for i in range(len(x)))
    X, Y = grid.meshgrid()
    return ((X[i, j], Y[i, j], u[i, j])
            for i in range(u.shape[0]) for j in range(u.shape[1]))


def _write_snapshot(path: Path, grid, u) -> None:
    header = "x,u" if len(grid.axes) == 1 else "x,y,u"
    _write_csv(path, header, _snapshot_rows(grid, u))


def _write_manifest(outdir: Path, command: str, cfg, artifacts: list[str],
                    started: float, extra: dict) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "config": cfg,
        "artifacts": sorted(artifacts),
        "duration_s": round(time.monotonic() - started, 3),
        "result": extra,
    }
    path = outdir / "summary.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _resolve_config(args) -> dict[str, dict[str, str]]:
    if getattr(args, "config", None):
        text = Path(args.config).read_text()
        cfg = parse_config(text)
    elif getattr(args, "preset", None):
        cfg = preset_config(args.preset)
    else:
        raise ConfigError("need --preset or --config")

    if getattr(args, "preset", None):
        cfg["output"]["preset"] = args.preset

    overrides = {
        ("equation", "lambda"): getattr(args, "lam", None),
        ("domain", "n"): getattr(args, "n", None),
        ("time", "t_max"): getattr(args, "t_max", None),
        ("time", "dt_max"): getattr(args, "dt_max", None),
        ("time", "steady_tol"): getattr(args, "steady_tol", None),
        ("time", "record_every"): getattr(args, "record_every", None),
        ("time", "snapshot_times"): getattr(args, "snapshot_times", None),
    }
    for (section, key), value in overrides.items():
        if value is not None:
            cfg[section][key] = str(value)
    for item in getattr(args, "set", None) or []:
        try:
            dotted, value = item.split("=", 1)
            section, key = dotted.split(".", 1)
        except ValueError:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        if section not in cfg or key not in cfg[section]:
            raise ConfigError(f"unknown config key {dotted!r}")
        cfg[section][key] = value
    return cfg


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args)
    sim = build_sim_config(cfg)
    outdir = _outdir(args)
    outcome, samples, snapshots = run(sim)

    artifacts = []
    traj = outdir / "trajectory.csv"
    _write_trajectory(traj, samples)
    artifacts.append(traj.name)
    for t, field in snapshots:
        path = outdir / f"snapshot_t{_fmt(t)}.csv"
        _write_snapshot(path, sim.grid, field)
        artifacts.append(path.name)
    final = outdir / "final.csv"
    final_field = getattr(outcome, "steady", None)
    if final_field is None:
        final_field = getattr(outcome, "final", None)
    if final_field is not None:
        _write_snapshot(final, sim.grid, final_field)
        artifacts.append(final.name)

    if isinstance(outcome, Converged):
        result = {"verdict": "converged", "t_reached": outcome.t_reached}
        code = 0
    elif isinstance(outcome, Quenched):
        result = {"verdict": "quenched", "t_quench": outcome.t_quench,
                  "peak_location": outcome.peak_location,
                  "by_dt_collapse": outcome.by_dt_collapse}
        code = 2
    else:
        result = {"verdict": "timed-out", "t_max": sim.t_max}
        code = 0
    result["max_u_final"] = samples[-1].max_u
    _write_manifest(outdir, "run", cfg, artifacts, started, result)
    print(f"run: {result['verdict']} (lambda={sim.params.lam}, "
          f"t={samples[-1].t:.4g})")
    return code


def _sweep_series(task) -> tuple[float, list[tuple[float, float]]]:
    lam, cfg_dict, n_samples = task
    sim = build_sim_config(cfg_dict).with_lambda(lam)
    times = tuple(float(t) for t in np.linspace(0.0, sim.t_max, n_samples)[1:])
    sim = replace(sim, snapshot_times=times)
    outcome, samples, snapshots = run(sim)
    series = [(0.0, probe_value(sim, sim.u0))]
    series += [(t, probe_value(sim, u)) for t, u in snapshots]
    if isinstance(outcome, Converged):
        # steady from the early-convergence time onward
        last_t = series[-1][0]
        for t in times:
            if t > last_t:
                series.append((t, probe_value(sim, outcome.steady)))
    return lam, series


def cmd_sweep(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args)
    outdir = _outdir(args)
    lams = [float(s) for s in args.lambdas.split(",") if s.strip()]
    if not lams:
        raise ConfigError("--lambdas must list at least one value")

    tasks = [(lam, cfg, args.samples) for lam in lams]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_series, tasks))
    else:
        results = [_sweep_series(t) for t in tasks]

    rows = []
    for lam, series in results:
        rows.extend((lam, t, v) for t, v in series)
    path = outdir / "sweep.csv"
    _write_csv(path, "lambda,t,probe_value", rows)
    _write_manifest(outdir, "sweep", cfg, [path.name], started,
                    {"lambdas": lams})
    print(f"sweep: wrote {path} ({len(lams)} voltages)")
    return 0


def cmd_bisect(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args)
    sim = build_sim_config(cfg)
    outdir = _outdir(args)
    iterations: list[tuple] = []

    def record(i, lo, hi, mid, verdict):
        iterations.append((i, lo, hi, mid, verdict.value))

    try:
        lo, hi = bisect_lambda_star(sim, args.lo, args.hi, args.tol,
                                    jobs=args.jobs, on_iteration=record)
    except InvalidBracket as exc:
        print(f"bisect: invalid bracket: {exc}", file=sys.stderr)
        return 1

    path = outdir / "bisect.csv"
    with open(path, "w", newline="") as fh:
        fh.write("iter,lo,hi,mid,verdict\n")
        for i, blo, bhi, mid, verdict in iterations:
            fh.write(f"{i},{_fmt(blo)},{_fmt(bhi)},{_fmt(mid)},{verdict}\n")
    _write_manifest(outdir, "bisect", cfg, [path.name], started,
                    {"lo": lo, "hi": hi, "tol": args.tol,
                     "iterations": len(iterations)})
    print(f"bisect: critical voltage in [{lo:.6g}, {hi:.6g}]")
    return 0


def cmd_steady(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args)
    sim = build_sim_config(cfg)
    outdir = _outdir(args)

    if args.lambdas:
        targets = [float(s) for s in args.lambdas.split(",") if s.strip()]
    else:
        targets = [sim.params.lam]
    result = continuation(sim.grid, targets, sim.params)

    artifacts = []
    rows = []
    for point in result.points:
        path = outdir / f"steady_lambda{_fmt(point.lam)}.csv"
        _write_snapshot(path, sim.grid, point.phi)
        artifacts.append(path.name)
        rows.append((point.lam, point.max_phi, point.newton_iters,
                     point.residual_norm))
    branch = outdir / "branch.csv"
    _write_csv(branch, "lambda,max_phi,newton_iters,residual_norm", rows)
    artifacts.append(branch.name)
    extra = {"points": len(result.points), "fold_lambda": result.fold_lambda}
    _write_manifest(outdir, "steady", cfg, artifacts, started, extra)

    if result.fold_lambda is not None and len(result.points) < len(targets):
        print(f"steady: no solution past fold near lambda={result.fold_lambda:.6g}")
        return 1
    last = result.points[-1]
    print(f"steady: lambda={last.lam} max_phi={last.max_phi:.6g} "
          f"iters={last.newton_iters}")
    return 0


def cmd_rate(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args)
    sim = build_sim_config(cfg)
    outdir = _outdir(args)

    cont = continuation(sim.grid, [sim.params.lam], sim.params)
    if cont.fold_lambda is not None and not cont.points:
        print("rate: no steady state at this voltage", file=sys.stderr)
        return 1
    phi = cont.points[-1].phi

    # steady detection off so the decay signal continues through t_max
    times = tuple(float(t) for t in np.linspace(0.0, sim.t_max, args.samples)[1:])
    sim_rec = replace(sim, snapshot_times=times, steady_tol=1e-14)
    outcome, _, snapshots = run(sim_rec)
    if isinstance(outcome, Quenched):
        print("rate: trajectory quenched; no decay to fit", file=sys.stderr)
        return 1
    series = [(t, l2_distance(sim.grid, u, phi)) for t, u in snapshots]

    window = None
    if args.fit_window:
        a, b = (float(s) for s in args.fit_window.split(","))
        window = (a, b)
    fit = fit_decay(series, args.model, window=window)

    path = outdir / "decay.csv"
    _write_csv(path, "t,distance", series)
    if fit.converged_exactly:
        extra = {"converged_exactly": True}
    else:
        kind = "exponential" if isinstance(fit.model, Exponential) else "algebraic"
        value = fit.model.rate if kind == "exponential" else fit.model.exponent
        extra = {"model": kind, "parameter": value,
                 "amplitude": fit.model.amplitude, "r_squared": fit.r_squared,
                 "theta_implied": fit.theta_implied,
                 "window": list(fit.window)}
    _write_manifest(outdir, "rate", cfg, [path.name], started, extra)
    if fit.converged_exactly:
        print("rate: distances identically zero (already steady)")
    else:
        print(f"rate: {kind} fit, parameter={value:.6g}, "
              f"r2={fit.r_squared:.6f}")
    return 0


def cmd_bound(args) -> int:
    started = time.monotonic()
    if args.domain == "disk":
        domain = RadialDisk(args.radius)
    elif args.domain == "rectangle":
        domain = Rectangle(args.lx, args.ly)
    else:
        raise ConfigError(f"unsupported domain {args.domain!r} for the bound")
    beta = "auto" if args.beta == "auto" else float(args.beta)
    value = nonexistence_bound(domain, beta)
    print(_fmt(value))
    if args.outdir or os.environ.get("MEMSIM_OUTDIR"):
        outdir = _outdir(args)
        _write_manifest(outdir, "bound", {"domain": {"kind": args.domain}},
                        [], started, {"bound": value, "beta": str(args.beta)})
    return 0


def cmd_presets(args) -> int:
    print(f"{'name':<16} {'domain':<14} {'n':>5} {'t_max':>6} {'lambda':>8}")
    for cfg in presets():
        kind, _ = _PRESET_DOMAIN[cfg.name]
        print(f"{cfg.name:<16} {kind:<14} {cfg.grid.shape[0]:>5} "
              f"{cfg.t_max:>6g} {cfg.params.lam:>8g}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, needs_scenario=True) -> None:
    if needs_scenario:
        p.add_argument("--preset", choices=PRESET_NAMES)
        p.add_argument("--config", help="path to key=value config file")
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="voltage parameter")
        p.add_argument("--n", type=int, default=None, help="nodes per axis")
        p.add_argument("--t-max", type=float, default=None)
        p.add_argument("--dt-max", type=float, default=None)
        p.add_argument("--steady-tol", type=float, default=None)
        p.add_argument("--record-every", type=int, default=None)
        p.add_argument("--snapshot-times", default=None,
                       help="comma-separated times")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override any config key")
    p.add_argument("--outdir", default=None,
                   help="output directory (default $MEMSIM_OUTDIR or ./memsim_out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memsim",
        description="Simulator for voltage-driven membrane deflection with a "
                    "nonlocal capacitive coupling")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one scenario in time")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="probe-point series over a voltage list")
    _add_common(p)
    p.add_argument("--lambdas", required=True, help="comma-separated voltages")
    p.add_argument("--samples", type=int, default=201,
                   help="time samples per voltage")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bisect", help="bracket the critical voltage")
    _add_common(p)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bisect)

    p = sub.add_parser("steady", help="steady profiles by Newton continuation")
    _add_common(p)
    p.add_argument("--lambdas", default=None,
                   help="continuation targets (default: single --lambda)")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("rate", help="fit the decay rate toward the steady state")
    _add_common(p)
    p.add_argument("--samples", type=int, default=301)
    p.add_argument("--model", choices=("auto", "exp", "alg"), default="auto")
    p.add_argument("--fit-window", default=None, metavar="T0,T1")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("bound", help="voltage bound beyond which no steady "
                                     "state exists (2D domains)")
    p.add_argument("--domain", choices=("disk", "rectangle"), required=True)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--lx", type=float, default=1.0)
    p.add_argument("--ly", type=float, default=1.0)
    p.add_argument("--beta", default="auto")
    _add_common(p, needs_scenario=False)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("presets", help="list named experiment scenarios")
    p.set_defaults(func=cmd_presets)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"memsim: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
