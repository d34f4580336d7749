import math

import numpy as np
import pytest

from fdsp.diagnostics import (BlowupStatus, WraparoundAlarm, blowup_monitor,
                              chain_rule_sample, conserved_set,
                              dispersive_decay_probe, edge_ratio,
                              inequality_sample, kato_ponce_sample, mass,
                              nlfs_energy, nlfw_energy, power_difference_sample,
                              power_estimate_sample, rescale_field,
                              rescale_norm_exponent, scaling_covariance_check,
                              scattering_monitor)
from fdsp.evolution import GridSpec, InitialSpec, RunConfig, integrate_nlfs
from fdsp.exponents import EquationKind, EquationParams, HypothesisError
from fdsp.profiles import gaussian, plane_wave, random_field
from fdsp.spectral import Field, WaveState

NLFW = EquationKind.NLFW


class TestConservedSet:
    def test_plane_wave_mass(self, grid1d):
        u = plane_wave(grid1d, 1.5, 2)
        cs = conserved_set(u, EquationParams(1, 2, 3))
        assert cs.mass == pytest.approx(1.5 ** 2 * grid1d.box_length, rel=1e-12)

    def test_zero_field(self, grid1d):
        cs = conserved_set(Field.zero(grid1d), EquationParams(1, 2, 3))
        assert cs.mass == 0.0 and cs.energy == 0.0

    def test_gaussian_energy_fine_grid_oracle(self):
        # refined-quadrature oracle: evaluate the same analytic profile on a
        # 4x grid; spectrally accurate quadratures must agree to 1e-8
        params = EquationParams(1, 2, 3, 1)
        vals = []
        for n in (256, 1024):
            grid = GridSpec(1, n, 8 * math.pi).build()
            u = gaussian(grid, 1.0, 1.2)
            vals.append(nlfs_energy(u, params))
        assert abs(vals[0] - vals[1]) / abs(vals[1]) < 1e-8

    def test_wave_energy_components(self, grid1d):
        params = EquationParams(1, 0.75, 3, 1, NLFW)
        v = gaussian(grid1d, 0.5, 0.9)
        state = WaveState(v, Field.zero(grid1d))
        cs = conserved_set(state, params)
        assert cs.mass == pytest.approx(mass(v), rel=1e-12)
        assert cs.energy == pytest.approx(nlfw_energy(state, params), rel=1e-12)

    def test_focusing_coercive_energy_nonnegative(self, grid1d):
        # under this flow convention the coercive (globally bounded) sign is
        # mu = -1: its conserved energy is a sum of nonnegative terms
        params = EquationParams(1, 2, 3, -1)
        for seed in range(6):
            u = random_field(grid1d, seed, alpha=1.0)
            assert nlfs_energy(u, params) >= 0.0

    def test_coercive_energy_bound_along_flow(self):
        # the global-existence mechanism: at the coercive sign the kinetic
        # part stays below twice the conserved energy at every checkpoint
        from fdsp.lpnorms import h_dot_sq

        params = EquationParams(1, 2, 3, -1)
        cfg = RunConfig(params, GridSpec(1, 256, 8 * math.pi),
                        InitialSpec("gaussian", amplitude=0.8, width=1.2),
                        dt=1e-3, t_final=0.5, snapshot_stride=50)
        traj = integrate_nlfs(cfg)
        assert traj.status == "completed"
        e0 = traj.records[0]["energy"]
        for _, state in traj.snapshots():
            kinetic = h_dot_sq(state, float(params.sigma) / 2.0)
            assert kinetic <= 2.0 * e0 * (1.0 + 1e-6)


class TestRescaling:
    def test_identity_at_lambda_one(self, grid1d):
        params = EquationParams(1, 2, 3)
        u = gaussian(grid1d, 1.0, 0.9)
        out = rescale_field(u, 1.0, params)
        assert np.array_equal(out.values, u.values)
        assert out.grid == u.grid

    def test_norm_exponent_hand_value(self, grid1d):
        # d=1, sigma=2, nu=3, gamma=0: exponent d/2 - sigma/(nu-1) = -1/2
        params = EquationParams(1, 2, 3)
        u = gaussian(grid1d, 1.0, 0.9)
        measured = rescale_norm_exponent(u, 2.0, params, 0.0)
        assert abs(measured - (-0.5)) < 1e-8

    def test_critical_norm_invariant(self, grid1d):
        params = EquationParams(1, 1.5, 3)
        gamma_s = 0.5 - 1.5 / 2
        u = random_field(grid1d, 3, alpha=1.0, mean_free=True)
        measured = rescale_norm_exponent(u, 4.0, params, gamma_s)
        assert abs(measured - 0.0) < 1e-8

    def test_rejects_non_power_of_two(self, grid1d):
        with pytest.raises(ValueError):
            rescale_field(gaussian(grid1d, 1.0, 0.9), 3.0,
                          EquationParams(1, 2, 3))

    def test_wave_weight(self, grid1d):
        params = EquationParams(1, 1.5, 3, kind=NLFW)
        u = gaussian(grid1d, 1.0, 0.9)
        measured = rescale_norm_exponent(u, 2.0, params, 0.0)
        assert abs(measured - (0.5 - 2 * 1.5 / 2)) < 1e-8


class TestScalingCovariance:
    def _config(self, **kw):
        defaults = dict(params=EquationParams(1, 1.5, 3, 1),
                        grid=GridSpec(1, 128, 4 * math.pi),
                        initial=InitialSpec("gaussian", amplitude=0.2,
                                            width=0.9),
                        dt=1e-3, t_final=0.05, snapshot_stride=10)
        defaults.update(kw)
        return RunConfig(**defaults)

    def test_linear_mode_exact(self):
        dev = scaling_covariance_check(self._config(linear_mode=True), 2.0)
        assert dev < 1e-10

    def test_lambda_one_is_zero(self):
        dev = scaling_covariance_check(self._config(linear_mode=True), 1.0)
        assert dev < 1e-14

    def test_nonlinear_small_data(self):
        dev = scaling_covariance_check(self._config(), 2.0)
        assert dev < 1e-6


class TestDecayProbe:
    def test_guard_rejects_nonpositive_times(self):
        with pytest.raises(ValueError):
            dispersive_decay_probe(1, 0.5, [0.0, 1.0], 256.0, 2048)
        with pytest.raises(ValueError):
            dispersive_decay_probe(1, 0.5, [2.0, 1.0], 256.0, 2048)

    def test_small_box_raises_alarm(self):
        with pytest.raises(WraparoundAlarm):
            dispersive_decay_probe(1, 1.5, [1.0, 8.0, 64.0], 64.0, 512)

    def test_edge_ratio_zero_field(self, grid1d):
        assert edge_ratio(Field.zero(grid1d)) == 0.0


class TestMonitors:
    def _run(self, **kw):
        defaults = dict(params=EquationParams(1, 1.5, 3, 1),
                        grid=GridSpec(1, 128, 4 * math.pi),
                        initial=InitialSpec("gaussian", amplitude=0.3,
                                            width=0.9),
                        dt=1e-3, t_final=0.1, snapshot_stride=10)
        defaults.update(kw)
        return integrate_nlfs(RunConfig(**defaults))

    def test_scattering_monitor_free_flow(self):
        traj = self._run(linear_mode=True)
        incs = scattering_monitor(traj, traj.params, 0.75)
        norm0 = mass(traj.states[0]) ** 0.5
        assert max(e["increment"] for e in incs) < 1e-12 * max(norm0, 1.0)

    def test_scattering_monitor_zero_data(self):
        traj = self._run(initial=InitialSpec("zero"), linear_mode=True)
        incs = scattering_monitor(traj, traj.params, 0.75)
        assert all(e["increment"] == 0.0 for e in incs)

    def test_scattering_monitor_rejects_wave(self):
        from fdsp.evolution import integrate_nlfw

        cfg = RunConfig(EquationParams(1, 0.75, 3, 1, NLFW),
                        GridSpec(1, 128, 4 * math.pi),
                        InitialSpec("gaussian", amplitude=0.3, width=0.9),
                        dt=1e-3, t_final=0.05, method="wave-trig")
        traj = integrate_nlfw(cfg)
        with pytest.raises(ValueError):
            scattering_monitor(traj, cfg.params, 0.75)

    def test_blowup_monitor_completed(self):
        traj = self._run()
        status = blowup_monitor(traj, 0.75)
        assert isinstance(status, BlowupStatus)
        assert status.status == "completed"
        assert status.time is None
        assert len(status.history) == len(traj.times)
        assert all(v > 0 for _, v in status.history)

    def test_blowup_monitor_ceiling(self):
        traj = self._run(params=EquationParams(1, 0.75, 3, -1),
                         initial=InitialSpec("gaussian", amplitude=4.0,
                                             width=0.6),
                         t_final=1.0, ceiling_factor=1.05)
        status = blowup_monitor(traj, 0.375)
        assert status.status == "ceiling-exceeded"
        assert status.time is not None

    def test_blowup_monitor_zero_data(self):
        traj = self._run(initial=InitialSpec("zero"))
        status = blowup_monitor(traj, 0.75)
        assert status.status == "completed"
        assert all(v == 0.0 for _, v in status.history)


class TestInequalitySamplers:
    def test_power_estimate_gamma0_is_exact_holder(self, random_suite):
        for u in random_suite[:12]:
            sample = power_estimate_sample(u, 0.0, 3.0, 2, 6, 6)
            assert sample.ratio <= 1.0 + 1e-10

    def test_kato_ponce_constant_second_factor(self, grid1d, random_suite):
        u = random_suite[0]
        ones = Field(grid1d, np.ones(grid1d.shape, dtype=complex))
        sample = kato_ponce_sample(u, ones, 0.5, 2, 2, math.inf, 2, math.inf)
        assert sample.ratio > 0
        assert math.isfinite(sample.ratio)
        # lhs = ||Lam^g u||_2 exactly; rhs includes that same term
        assert sample.ratio <= 1.0 + 1e-10

    def test_chain_rule_refinement_stability(self):
        vals = []
        for n in (128, 256):
            grid = GridSpec(1, n, 4 * math.pi).build()
            worst = 0.0
            for seed in range(40):
                u = random_field(grid, 900 + seed, alpha=1.0, modes_cap=32)
                s = chain_rule_sample(u, 0.5, 2.0, 2, 4, 4, analytic=True)
                worst = max(worst, s.ratio)
            vals.append(worst)
        assert abs(vals[1] - vals[0]) / vals[0] < 0.2

    def test_power_difference_finite_positive(self, random_suite):
        s = power_difference_sample(random_suite[0], random_suite[1],
                                    0.5, 3.0, 2, 6, 6)
        assert s.ratio > 0 and math.isfinite(s.ratio)

    def test_exponent_relation_guard(self, random_suite):
        with pytest.raises(HypothesisError):
            kato_ponce_sample(random_suite[0], random_suite[1], 0.5,
                              2, 3, 4, 4, 4)
        with pytest.raises(HypothesisError):
            power_estimate_sample(random_suite[0], 0.5, 3.0, 2, 4, 6)

    def test_smoothness_hypothesis_guard(self, random_suite):
        with pytest.raises(HypothesisError):
            power_estimate_sample(random_suite[0], 2.5, 2.2, 2, 6, 6)
        with pytest.raises(HypothesisError):
            power_difference_sample(random_suite[0], random_suite[1],
                                    1.5, 2.2, 2, 6, 6)
        # odd integer powers are exempt
        s = power_estimate_sample(random_suite[0], 2.5, 3.0, 2, 6, 6)
        assert s.ratio > 0

    def test_chain_rule_gamma_range_guard(self, random_suite):
        with pytest.raises(HypothesisError):
            chain_rule_sample(random_suite[0], 1.5, 2.0, 2, 4, 4)

    def test_dispatch(self, random_suite):
        s = inequality_sample("power-estimate",
                              dict(gamma=0.5, nu=3.0, r=2, p=6, q=6),
                              [random_suite[0]])
        assert s.descriptor["kind"] == "power-estimate"
        with pytest.raises(KeyError):
            inequality_sample("sobolev-embedding", {}, [])
