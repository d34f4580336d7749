import dataclasses
import math

import numpy as np
import pytest
import scipy.integrate

from fdsp.evolution import (GridSpec, InitialSpec, NoContractionError,
                            PicardSpec, RunConfig, integrate, integrate_nlfs,
                            integrate_nlfw, nonlinear_phase_step,
                            picard_solve_nlfs, picard_solve_nlfw, step_nlfs,
                            step_nlfw)
from fdsp.exponents import EquationKind, EquationParams
from fdsp.profiles import gaussian, plane_wave
from fdsp.spectral import Field, WaveState, schrodinger_propagate, wave_propagate

from conftest import l2_values

NLFS = EquationKind.NLFS
NLFW = EquationKind.NLFW


def nlfs_config(**kw):
    defaults = dict(params=EquationParams(1, 2, 3, 1),
                    grid=GridSpec(1, 128, 4 * math.pi),
                    initial=InitialSpec("gaussian", amplitude=0.5, width=0.9),
                    dt=1e-3, t_final=0.1, snapshot_stride=10)
    defaults.update(kw)
    return RunConfig(**defaults)


def nlfw_config(**kw):
    defaults = dict(params=EquationParams(1, 0.75, 3, 1, NLFW),
                    grid=GridSpec(1, 128, 4 * math.pi),
                    initial=InitialSpec("gaussian", amplitude=0.5, width=0.9),
                    dt=5e-4, t_final=0.1, method="wave-trig",
                    snapshot_stride=20)
    defaults.update(kw)
    return RunConfig(**defaults)


class TestNonlinearPhase:
    def _unit(self, field):
        return field.with_values(field.values / np.abs(field.values).max())

    def test_modulus_preserved(self, grid1d, random_suite):
        u = self._unit(random_suite[0])
        params = EquationParams(1, 2, 2.6, -1)
        out = nonlinear_phase_step(u, 0.37, params)
        assert np.abs(np.abs(out.values) - np.abs(u.values)).max() < 1e-15

    def test_constant_closed_form(self, grid1d):
        c = 1.3 - 0.4j
        u = Field(grid1d, np.full(grid1d.shape, c))
        params = EquationParams(1, 2, 3, -1)
        out = nonlinear_phase_step(u, 0.21, params)
        expected = c * np.exp(-1j * abs(c) ** 2 * 0.21)
        assert np.abs(out.values - expected).max() < 1e-14

    def test_group_law(self, grid1d, random_suite):
        u = self._unit(random_suite[1])
        params = EquationParams(1, 2, 3.4, 1)
        split = nonlinear_phase_step(nonlinear_phase_step(u, 0.13, params),
                                     0.29, params)
        whole = nonlinear_phase_step(u, 0.42, params)
        assert np.abs(split.values - whole.values).max() < 1e-14


class TestSplitStep:
    def test_linear_mode_matches_free_propagator(self):
        cfg = nlfs_config(linear_mode=True, dt=1e-2, t_final=0.3)
        traj = integrate_nlfs(cfg)
        grid = cfg.grid.build()
        exact = schrodinger_propagate(cfg.initial.build(grid), 0.3,
                                      float(cfg.params.sigma))
        err = np.abs(traj.final_state().values - exact.values).max()
        assert err < 1e-12

    def test_plane_wave_dispersion_relation_exact(self):
        # both substeps act as commuting phases on plane waves, so the
        # split-step solution carries the exact nonlinear dispersion law
        amp, mode, sigma, mu = 0.8, 2, 1.5, 1
        cfg = nlfs_config(params=EquationParams(1, sigma, 3, mu),
                          initial=InitialSpec("plane-wave", amplitude=amp,
                                              mode=(mode,)),
                          dt=1e-2, t_final=0.5)
        traj = integrate_nlfs(cfg)
        grid = cfg.grid.build()
        xi0 = mode * 2 * math.pi / grid.box_length
        omega = xi0 ** sigma - mu * amp ** 2
        x = np.arange(grid.n) * grid.dx
        exact = amp * np.exp(1j * (xi0 * x - omega * 0.5))
        assert np.abs(traj.final_state().values - exact).max() < 1e-12

    def test_mass_conserved(self):
        traj = integrate_nlfs(nlfs_config(t_final=0.2))
        masses = [r["mass"] for r in traj.records]
        assert max(abs(m - masses[0]) for m in masses) / masses[0] < 1e-10

    def test_energy_drift_second_order(self):
        # halving dt shrinks the energy drift by roughly 4
        drifts = []
        for dt in (2e-3, 1e-3, 5e-4):
            traj = integrate_nlfs(nlfs_config(dt=dt, t_final=0.2,
                                              initial=InitialSpec(
                                                  "gaussian", amplitude=0.8,
                                                  width=0.9)))
            es = [r["energy"] for r in traj.records]
            drifts.append(max(abs(e - es[0]) for e in es) / abs(es[0]))
        for a, b in zip(drifts, drifts[1:]):
            assert 3.0 <= a / b <= 5.0

    def test_time_reversal(self, grid1d):
        params = EquationParams(1, 1.5, 3, 1)
        u0 = gaussian(grid1d, 0.8, 0.9)
        u1 = step_nlfs(u0, 1e-3, params)
        back = step_nlfs(u1, -1e-3, params)
        rel = np.abs(back.values - u0.values).max() / np.abs(u0.values).max()
        assert rel < 1e-11

    def test_grid_refinement_spectral_accuracy(self):
        coarse = integrate_nlfs(nlfs_config(t_final=0.1))
        fine = integrate_nlfs(nlfs_config(grid=GridSpec(1, 256, 4 * math.pi),
                                          t_final=0.1))
        uc = coarse.final_state().values
        uf = fine.final_state().values[::2]  # common sample points
        rel = np.abs(uc - uf).max() / np.abs(uf).max()
        assert rel < 1e-6

    def test_nonfinite_aborts_with_status(self):
        # focusing, large data, under-resolved: the run must stop cleanly
        cfg = nlfs_config(params=EquationParams(1, 2, 5, -1),
                          initial=InitialSpec("gaussian", amplitude=60.0,
                                              width=0.25),
                          dt=1e-2, t_final=2.0, ceiling_factor=1e30)
        traj = integrate_nlfs(cfg)
        assert traj.status in ("blowup-suspected", "ceiling-exceeded",
                               "completed")
        assert traj.times[-1] <= 2.0

    def test_ceiling_monitor_aborts(self):
        cfg = nlfs_config(params=EquationParams(1, 0.75, 3, -1),
                          initial=InitialSpec("gaussian", amplitude=4.0,
                                              width=0.6),
                          dt=1e-3, t_final=1.0, ceiling_factor=1.05)
        traj = integrate_nlfs(cfg)
        assert traj.status == "ceiling-exceeded"
        assert traj.status_time is not None
        assert traj.records[-1]["monitor_norm"] > 0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            nlfs_config(dt=-1.0)
        with pytest.raises(ValueError):
            nlfs_config(t_final=1e-5)  # below dt
        with pytest.raises(ValueError):
            nlfs_config(method="rk4")
        with pytest.raises(ValueError):
            nlfs_config(dt=3e-3, t_final=1.0)  # not a multiple


class TestWaveIntegrator:
    def test_linear_mode_matches_wave_propagator(self):
        cfg = nlfw_config(linear_mode=True, dt=1e-2, t_final=0.3)
        traj = integrate_nlfw(cfg)
        grid = cfg.grid.build()
        state0 = WaveState(cfg.initial.build(grid), Field.zero(grid))
        exact = wave_propagate(state0, 0.3, float(cfg.params.sigma))
        err = np.abs(traj.final_state().position.values
                     - exact.position.values).max()
        assert err < 1e-12

    def test_constant_data_against_ode_oracle(self):
        # constant field: the flow solves v'' = -v^3; verify against an
        # independent high-order ODE integration over t in [0, 2]
        cfg = nlfw_config(grid=GridSpec(1, 8, 2 * math.pi),
                          initial=InitialSpec("plane-wave", amplitude=1.0,
                                              mode=(0,)),
                          dt=2.5e-4, t_final=2.0, snapshot_stride=800)
        traj = integrate_nlfw(cfg)
        sol = scipy.integrate.solve_ivp(
            lambda t, y: [y[1], -y[0] ** 3], (0.0, 2.0), [1.0, 0.0],
            method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
        for t, state in traj.snapshots():
            value = state.position.values.flat[0]
            assert abs(value - sol.sol(t)[0]) < 1e-6

    def test_energy_drift(self):
        traj = integrate_nlfw(nlfw_config(t_final=0.5))
        es = [r["energy"] for r in traj.records]
        assert max(abs(e - es[0]) for e in es) / abs(es[0]) < 1e-6

    def test_time_reversal(self, grid1d):
        params = EquationParams(1, 0.75, 3, 1, NLFW)
        state = WaveState(gaussian(grid1d, 0.8, 0.9), Field.zero(grid1d))
        fwd = step_nlfw(state, 1e-3, params)
        back = step_nlfw(fwd, -1e-3, params)
        scale = np.abs(state.position.values).max()
        assert np.abs(back.position.values - state.position.values).max() / scale < 1e-11
        assert np.abs(back.velocity.values - state.velocity.values).max() / scale < 1e-11

    def test_requires_wave_params(self):
        with pytest.raises(ValueError):
            integrate_nlfw(nlfs_config())


class TestPicardSchrodinger:
    def test_zero_data_fixed_point(self):
        cfg = nlfs_config(initial=InitialSpec("zero"), method="picard",
                          dt=1e-2, t_final=0.1)
        traj, report = picard_solve_nlfs(cfg)
        assert report.iterations == 1
        assert report.converged
        assert np.abs(traj.final_state().values).max() == 0.0

    def test_cross_method_agreement(self):
        base = nlfs_config(initial=InitialSpec("gaussian", amplitude=0.3,
                                               width=1.0),
                           method="picard", dt=2e-3, t_final=0.2,
                           picard=PicardSpec(40, 1e-12, 1))
        traj_p, report = picard_solve_nlfs(base)
        assert report.converged
        cfg_ss = dataclasses.replace(base, method="split-step", dt=2e-4)
        traj_s = integrate_nlfs(cfg_ss)
        grid = base.grid.build()
        diff = traj_p.final_state().values - traj_s.final_state().values
        assert l2_values(diff, grid) < 1e-4

    def test_contraction_monotone(self):
        cfg = nlfs_config(initial=InitialSpec("gaussian", amplitude=0.3,
                                              width=1.0),
                          method="picard", dt=2e-3, t_final=0.2,
                          picard=PicardSpec(40, 1e-12, 1))
        _, report = picard_solve_nlfs(cfg)
        assert all(b < a for a, b in zip(report.diff_norms,
                                         report.diff_norms[1:]))
        assert report.ratios and report.ratios[-1] < 1.0
        assert report.contraction_factor < 1.0

    def test_amplitude_doubling_scales_factor(self):
        def factor(amduring):
            cfg = nlfs_config(initial=InitialSpec("gaussian",
                                                  amplitude=amduring,
                                                  width=1.0),
                              method="picard", dt=2e-3, t_final=0.2,
                              picard=PicardSpec(40, 1e-12, 1))
            return picard_solve_nlfs(cfg)[1].contraction_factor

        ratio = factor(0.6) / factor(0.3)
        # nu = 3: expect ~ 2^(nu-1) = 4, within a factor 2 either way
        assert 2.0 <= ratio <= 8.0

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")  # divergence overflows
    def test_no_contraction_error(self):
        cfg = nlfs_config(initial=InitialSpec("gaussian", amplitude=6.0,
                                              width=1.0),
                          method="picard", dt=5e-2, t_final=1.0,
                          picard=PicardSpec(12, 1e-12, 1))
        with pytest.raises(NoContractionError) as info:
            picard_solve_nlfs(cfg)
        assert info.value.ratios  # error carries the ratio history

    def test_linear_mode_is_free_flow(self):
        cfg = nlfs_config(linear_mode=True, method="picard", dt=1e-2,
                          t_final=0.1)
        traj, report = picard_solve_nlfs(cfg)
        assert report.iterations == 1
        grid = cfg.grid.build()
        exact = schrodinger_propagate(cfg.initial.build(grid), 0.1,
                                      float(cfg.params.sigma))
        assert np.abs(traj.final_state().values - exact.values).max() < 1e-12


class TestPicardWave:
    def test_zero_data(self):
        cfg = nlfw_config(initial=InitialSpec("zero"), method="picard",
                          dt=1e-2, t_final=0.1)
        traj, report = picard_solve_nlfw(cfg)
        assert report.iterations == 1
        assert np.abs(traj.final_state().position.values).max() == 0.0

    def test_linear_one_iteration_reproduces_wave_propagator(self):
        cfg = nlfw_config(linear_mode=True, method="picard", dt=1e-2,
                          t_final=0.2)
        traj, report = picard_solve_nlfw(cfg)
        assert report.iterations == 1
        grid = cfg.grid.build()
        exact = wave_propagate(WaveState(cfg.initial.build(grid),
                                         Field.zero(grid)), 0.2,
                               float(cfg.params.sigma))
        err = np.abs(traj.final_state().position.values
                     - exact.position.values).max()
        assert err < 1e-12

    def test_cross_method_agreement(self):
        base = nlfw_config(initial=InitialSpec("gaussian", amplitude=0.3,
                                               width=1.0),
                           method="picard", dt=2e-3, t_final=0.2,
                           picard=PicardSpec(40, 1e-12, 1))
        traj_p, report = picard_solve_nlfw(base)
        assert report.converged
        cfg_tr = dataclasses.replace(base, method="wave-trig", dt=2e-4)
        traj_t = integrate_nlfw(cfg_tr)
        grid = base.grid.build()
        diff = (traj_p.final_state().position.values
                - traj_t.final_state().position.values)
        assert l2_values(diff, grid) < 1e-4


class TestDispatchAndTwins:
    def test_integrate_dispatch(self):
        assert integrate(nlfs_config()).method == "split-step"
        assert integrate(nlfw_config()).method == "wave-trig"
        assert integrate(nlfs_config(method="picard",
                                     dt=1e-2, t_final=0.1)).method == "picard"
        wave_picard = integrate(nlfw_config(method="picard", dt=1e-2,
                                            t_final=0.1))
        assert wave_picard.method == "picard"
        assert wave_picard.picard_report is not None
        assert isinstance(wave_picard.final_state(), WaveState)

    def test_trajectory_invariants(self):
        traj = integrate(nlfs_config(t_final=0.05))
        assert traj.times[0] == 0.0
        assert all(b > a for a, b in zip(traj.times, traj.times[1:]))
        grid = traj.grid
        first = traj.states[0].values
        initial = nlfs_config().initial.build(grid).values
        assert np.array_equal(first, initial)

    def test_high_band_monitor_flags_underresolved(self):
        cfg = nlfs_config(params=EquationParams(1, 2, 2.5, -1),  # non-integer
                          initial=InitialSpec("gaussian", amplitude=8.0,
                                              width=0.2),
                          grid=GridSpec(1, 64, 4 * math.pi),
                          dt=1e-3, t_final=0.3, ceiling_factor=1e30)
        traj = integrate_nlfs(cfg)
        assert traj.high_band_alarm
