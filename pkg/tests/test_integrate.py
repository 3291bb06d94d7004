"""Time stepping, outcome classification, and preset tests."""

import numpy as np
import pytest

from memsim import (
    Converged,
    Interval,
    Params,
    Quenched,
    SimConfig,
    TimedOut,
    build_grid,
    laplacian_apply,
    make_preset,
    presets,
    probe_value,
    reaction,
    run,
    step,
)


def heat_config(lam=0.0, n=51, **kw):
    grid = build_grid(Interval(1.0), n)
    defaults = dict(grid=grid, params=Params(lam=lam), u0=grid.zero_field(),
                    t_max=1.0)
    defaults.update(kw)
    return SimConfig(**defaults)


class TestStep:
    def test_zero_voltage_zero_state(self):
        g = build_grid(Interval(1.0), 31)
        p = Params(lam=0.0)
        u1 = step(g.zero_field(), 0.3, g, p)
        assert np.all(u1 == 0.0)

    def test_pure_heat_decays(self):
        g = build_grid(Interval(1.0), 101)
        p = Params(lam=0.0)
        x = g.axes[0]
        u = 0.5 * np.sin(np.pi * x)
        u[~g.interior_mask] = 0.0
        for _ in range(5):
            u1 = step(u, 0.02, g, p)
            assert np.max(np.abs(u1)) <= np.max(np.abs(u)) + 1e-14
            u = u1

    def test_against_fine_explicit_euler(self):
        # independent reference: 1000 explicit-Euler micro-steps at dt=1e-6
        g = build_grid(Interval(1.0), 101)
        p = Params(lam=8.0)
        dt = 1e-3
        ours = step(g.zero_field(), dt, g, p, picard=True)
        u = g.zero_field()
        for _ in range(1000):
            u = u + 1e-6 * (laplacian_apply(g, u) + reaction(g, u, p))
            u[~g.interior_mask] = 0.0
        # first-order agreement; measured ratio ~0.19, frozen with headroom
        assert np.max(np.abs(ours - u)) <= 0.5 * dt

    def test_rejects_bad_dt(self):
        g = build_grid(Interval(1.0), 11)
        with pytest.raises(ValueError):
            step(g.zero_field(), 0.0, g, Params(lam=1.0))


class TestRun:
    def test_zero_voltage_converges_to_zero(self):
        out, samples, _ = run(heat_config(lam=0.0, t_max=5.0))
        assert isinstance(out, Converged)
        assert np.all(out.steady == 0.0)
        assert out.t_reached < 1.0

    def test_timeout_when_horizon_short(self):
        cfg = heat_config(lam=8.0, t_max=0.02, dt_max=0.005, dt_init=0.005,
                          steady_tol=1e-14)
        out, samples, _ = run(cfg)
        assert isinstance(out, TimedOut)
        assert samples[-1].t == pytest.approx(0.02, rel=1e-9)

    def test_supercritical_quenches(self):
        cfg = heat_config(lam=20.0, n=101, t_max=5.0)
        out, samples, _ = run(cfg)
        assert isinstance(out, Quenched)
        assert 0 < out.t_quench < 1.0
        assert not out.by_dt_collapse
        # touchdown at the midpoint of a symmetric profile
        assert out.peak_location == 50
        assert samples[-1].max_u < 1.0

    def test_dt_collapse_detection(self):
        # near-contact threshold plus a large dt floor: the step controller
        # underflows (at max_u ~ 0.78) long before max_u reaches 1 - 1e-8
        cfg = heat_config(lam=10.0, n=101, t_max=5.0,
                          dt_min=5e-3, dt_init=5e-3, dt_max=5e-3)
        from dataclasses import replace
        cfg = replace(cfg, params=Params(lam=10.0, quench_eps=1e-8))
        out, _, _ = run(cfg)
        assert isinstance(out, Quenched)
        assert out.by_dt_collapse

    def test_nonnegativity_along_run(self):
        cfg = make_preset("1d-unit", lam=8.0, t_max=2.0,
                          snapshot_times=tuple(np.linspace(0.1, 2.0, 20)))
        out, _, snaps = run(cfg)
        for _, u in snaps:
            assert np.min(u) >= -1e-12

    def test_snapshots_hit_exact_times(self):
        cfg = heat_config(lam=4.0, t_max=1.0, snapshot_times=(0.25, 0.6),
                          steady_tol=1e-14)
        _, _, snaps = run(cfg)
        assert [t for t, _ in snaps] == pytest.approx([0.25, 0.6], abs=1e-10)

    def test_sample_times_nondecreasing(self):
        cfg = heat_config(lam=6.0, t_max=2.0, record_every=3)
        _, samples, _ = run(cfg)
        ts = [s.t for s in samples]
        assert all(b >= a for a, b in zip(ts, ts[1:]))
        assert all(s.max_u < 1.0 and np.isfinite(s.energy) for s in samples)

    def test_energy_monotone_along_trajectory(self):
        cfg = make_preset("1d-unit", lam=8.53, record_every=2)
        _, samples, _ = run(cfg)
        es = [s.energy for s in samples]
        assert all(e2 <= e1 + 1e-6 * (1 + abs(e1))
                   for e1, e2 in zip(es[:-1], es[1:]))

    def test_mesh_robust_classification(self):
        # convergent at 8.3 and quenching at 8.8 on both meshes
        for lam, kind in ((8.3, Converged), (8.8, Quenched)):
            for n in (101, 201):
                cfg = make_preset("1d-unit", lam=lam, n=n)
                out, _, _ = run(cfg)
                assert isinstance(out, kind), (lam, n, out)


class TestConfigValidation:
    def test_dt_ordering(self):
        with pytest.raises(ValueError):
            heat_config(dt_min=0.1, dt_init=0.05, dt_max=0.2)

    def test_initial_data_below_contact(self):
        g = build_grid(Interval(1.0), 11)
        u0 = g.zero_field()
        u0[5] = 1.0
        with pytest.raises(ValueError):
            SimConfig(grid=g, params=Params(lam=1.0), u0=u0, t_max=1.0)

    def test_initial_data_boundary(self):
        g = build_grid(Interval(1.0), 11)
        with pytest.raises(ValueError):
            SimConfig(grid=g, params=Params(lam=1.0), u0=np.ones(11) * 0.1,
                      t_max=1.0)

    def test_snapshot_times_inside_horizon(self):
        with pytest.raises(ValueError):
            heat_config(snapshot_times=(2.0,), t_max=1.0)


class TestPresets:
    def test_all_presets_construct(self):
        all_cfgs = presets()
        assert [c.name for c in all_cfgs] == [
            "1d-unit", "disk-radial", "disk-cartesian", "square-unit"]

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            make_preset("3d-torus")

    def test_square_zero_initial(self):
        cfg = make_preset("square-unit")
        assert np.all(cfg.u0 == 0.0)
        assert cfg.grid.shape == (51, 51)

    def test_1d_unit_dirichlet(self):
        cfg = make_preset("1d-unit")
        assert cfg.u0[0] == 0.0 and cfg.u0[-1] == 0.0
        assert cfg.grid.domain == Interval(1.0)
        assert probe_value(cfg, cfg.grid.axes[0]) == pytest.approx(0.5)

    def test_disk_cartesian_bump(self):
        cfg = make_preset("disk-cartesian")
        u0 = cfg.u0
        # peak of 100 (1-x^2-y^2)^3 x^2 y^2 on the diagonal: s = x^2 = 0.2
        assert u0.max() == pytest.approx(100.0 * 0.6**3 * 0.04, rel=0.02)
        assert np.all(u0[~cfg.grid.interior_mask] == 0.0)
        assert u0.max() < 1.0

    def test_lambda_override(self):
        cfg = make_preset("1d-unit", lam=3.5)
        assert cfg.params.lam == 3.5
        cfg2 = cfg.with_lambda(4.5)
        assert cfg2.params.lam == 4.5 and cfg.params.lam == 3.5
