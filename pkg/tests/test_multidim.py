"""2-d and 3-d coverage: the engine is dimension-generic; these pin it."""

import math

import numpy as np
import pytest

from fdsp.diagnostics import (conserved_set, rescale_norm_exponent,
                              scaling_covariance_check)
from fdsp.evolution import (GridSpec, InitialSpec, RunConfig, integrate_nlfs,
                            integrate_nlfw)
from fdsp.exponents import EquationKind, EquationParams
from fdsp.lpnorms import besov_norm, lebesgue_norm, project_all, sobolev_norm
from fdsp.profiles import gaussian, plane_wave, random_field
from fdsp.spectral import (WaveState, make_grid, read_snapshot,
                           schrodinger_propagate, wave_propagate,
                           write_snapshot)


@pytest.fixture(scope="module")
def grid2d():
    return make_grid(2, 32, 4 * math.pi)


@pytest.fixture(scope="module")
def grid3d():
    return make_grid(3, 16, 2 * math.pi)


class TestSpectral2d3d:
    def test_plane_wave_eigenfunction_2d(self, grid2d):
        u = plane_wave(grid2d, 1.0, (2, 1))
        xi0 = 2 * math.pi / grid2d.box_length * math.sqrt(2 ** 2 + 1 ** 2)
        out = schrodinger_propagate(u, 0.4, 1.5)
        expected = np.exp(-1j * 0.4 * xi0 ** 1.5) * u.values
        assert np.abs(out.values - expected).max() < 1e-12

    def test_unitarity_3d(self, grid3d):
        u = random_field(grid3d, 1, alpha=1.0)
        before = math.sqrt(grid3d.cell_volume * np.sum(np.abs(u.values) ** 2))
        out = schrodinger_propagate(u, 1.7, 0.75)
        after = math.sqrt(grid3d.cell_volume * np.sum(np.abs(out.values) ** 2))
        assert abs(after - before) / before < 1e-12

    def test_wave_group_law_2d(self, grid2d):
        v = random_field(grid2d, 2, alpha=1.0)
        w = random_field(grid2d, 3, alpha=1.0)
        one = wave_propagate(wave_propagate(WaveState(v, w), 0.3, 1.5), 0.2, 1.5)
        two = wave_propagate(WaveState(v, w), 0.5, 1.5)
        scale = np.abs(v.values).max()
        assert np.abs(one.position.values - two.position.values).max() / scale < 1e-11

    def test_snapshot_round_trip_3d(self, tmp_path, grid3d):
        u = random_field(grid3d, 4, alpha=0.0)
        path = tmp_path / "cube.fdsp"
        write_snapshot(path, u)
        back = read_snapshot(path)
        assert back.grid == grid3d
        assert np.array_equal(back.values, u.values)


class TestNorms2d:
    def test_plane_wave_lebesgue(self, grid2d):
        u = plane_wave(grid2d, 1.0, (1, 1))
        for q in (2, 4):
            expected = grid2d.box_length ** (2.0 / q)
            assert abs(lebesgue_norm(u, q) - expected) / expected < 1e-12

    def test_resummation_2d(self, grid2d):
        u = random_field(grid2d, 5, alpha=1.0)
        total = sum(p.values for p in project_all(u).values())
        assert np.abs(total - u.values).max() / np.abs(u.values).max() < 1e-10

    def test_besov_bracket_2d(self, grid2d):
        u = random_field(grid2d, 6, alpha=1.0, mean_free=True)
        ratio = besov_norm(u, 0.0, 2, homogeneous=True) / lebesgue_norm(u, 2)
        assert 1 / math.sqrt(2) - 1e-12 <= ratio <= 1.0 + 1e-12

    def test_plane_wave_sobolev_hom_2d(self, grid2d):
        u = plane_wave(grid2d, 1.0, (2, 0))
        xi0 = 2 * 2 * math.pi / grid2d.box_length
        val = sobolev_norm(u, 0.5, 2, homogeneous=True)
        expected = xi0 ** 0.5 * grid2d.box_length
        assert abs(val - expected) / expected < 1e-12


class TestEvolution2d:
    def _cfg(self, **kw):
        defaults = dict(params=EquationParams(2, 1.5, 3, 1),
                        grid=GridSpec(2, 64, 4 * math.pi),
                        initial=InitialSpec("gaussian", amplitude=0.4,
                                            width=0.7),
                        dt=1e-3, t_final=0.05, snapshot_stride=10)
        defaults.update(kw)
        return RunConfig(**defaults)

    def test_mass_and_energy_drift_2d(self):
        traj = integrate_nlfs(self._cfg())
        ms = [r["mass"] for r in traj.records]
        es = [r["energy"] for r in traj.records]
        assert max(abs(m - ms[0]) for m in ms) / ms[0] < 1e-10
        assert max(abs(e - es[0]) for e in es) / abs(es[0]) < 1e-6

    def test_wave_energy_drift_2d(self):
        cfg = self._cfg(params=EquationParams(2, 0.75, 3, 1, EquationKind.NLFW),
                        method="wave-trig", dt=5e-4)
        traj = integrate_nlfw(cfg)
        es = [r["energy"] for r in traj.records]
        assert max(abs(e - es[0]) for e in es) / abs(es[0]) < 1e-6

    def test_scaling_covariance_2d(self):
        dev = scaling_covariance_check(self._cfg(linear_mode=True), 2.0)
        assert dev < 1e-10

    def test_rescale_exponent_2d(self, grid2d):
        params = EquationParams(2, 1.5, 3)
        u = gaussian(grid2d, 0.7, 1.0)
        measured = rescale_norm_exponent(u, 2.0, params, 0.0)
        assert abs(measured - (1.0 - 0.75)) < 1e-8

    def test_conserved_set_2d(self, grid2d):
        u = plane_wave(grid2d, 1.5, (1, 2))
        cs = conserved_set(u, EquationParams(2, 2, 3))
        assert cs.mass == pytest.approx(1.5 ** 2 * grid2d.box_length ** 2,
                                        rel=1e-12)
