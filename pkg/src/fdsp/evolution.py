"""Time integration of the fractional NLS and fractional wave flows.

Two routes per equation: an exponential split-step production scheme built
from the exact linear propagator and the exact nonlinear phase / impulse
flow, and a Picard iteration on the Duhamel integral formulation with
measured contraction diagnostics. Both substeps of the split scheme are
exact flows, so the composition is time-reversible and mass-conserving to
round-off for the Schrodinger flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

import numpy as np

from . import profiles
from .diagnostics import (mass, nlfs_energy, nlfw_energy, rescale_field,
                          scaling_weight)
from .exponents import EquationKind, EquationParams, is_odd_integer
from .lpnorms import lebesgue_norm
from .spectral import Field, PeriodicGrid, WaveState, make_grid

METHODS = ("split-step", "wave-trig", "picard")

HIGH_BAND_ALARM = 1e-6


class NoContractionError(RuntimeError):
    """Picard iteration hit max_iters with non-contracting differences."""

    def __init__(self, message, diff_norms, ratios):
        super().__init__(message)
        self.diff_norms = diff_norms
        self.ratios = ratios


@dataclass(frozen=True)
class GridSpec:
    d: int = 1
    n: int = 256
    box_length: float = 2.0 * math.pi

    def build(self) -> PeriodicGrid:
        return make_grid(self.d, self.n, self.box_length)


@dataclass(frozen=True)
class InitialSpec:
    """Named initial-data profile; `field_value` short-circuits construction
    with a prebuilt Field (runtime use, e.g. rescaled twin runs)."""

    profile: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    center: Optional[tuple] = None
    velocity: Optional[tuple] = None
    mode: tuple = (1,)
    seed: int = 0
    alpha: float = 0.0
    modes_cap: Optional[int] = None
    path: Optional[str] = None
    field_value: Optional[Field] = None

    def build(self, grid: PeriodicGrid) -> Field:
        if self.field_value is not None:
            if self.field_value.grid != grid:
                raise ValueError("prebuilt initial field is on a different grid")
            return self.field_value
        if self.profile == "zero":
            return Field.zero(grid)
        if self.profile == "gaussian":
            return profiles.gaussian(grid, self.amplitude, self.width,
                                     self.center, self.velocity)
        if self.profile == "plane-wave":
            return profiles.plane_wave(grid, self.amplitude, self.mode)
        if self.profile == "bump":
            return profiles.bump(grid, self.amplitude, self.width, self.center)
        if self.profile == "random":
            return profiles.random_field(grid, self.seed, self.alpha,
                                         self.modes_cap, amplitude=self.amplitude)
        if self.profile == "file":
            if not self.path:
                raise ValueError("file profile needs a path")
            return profiles.from_file(grid, self.path)
        raise ValueError(f"unknown initial profile {self.profile!r}")


@dataclass(frozen=True)
class PicardSpec:
    max_iters: int = 30
    tolerance: float = 1e-10
    nodes_per_step: int = 1

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("picard tolerance must be positive")
        if self.max_iters < 1 or self.nodes_per_step < 1:
            raise ValueError("picard iteration counts must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    params: EquationParams
    grid: GridSpec
    initial: InitialSpec
    dt: float
    t_final: float
    method: str = "split-step"
    initial_velocity: Optional[InitialSpec] = None
    snapshot_stride: int = 10
    linear_mode: bool = False
    dealias: str = "auto"  # auto | on | off
    norms: tuple = ()
    gamma_monitor: Optional[float] = None
    ceiling_factor: float = 1e6
    picard: PicardSpec = dc_field(default_factory=PicardSpec)
    smallness_eps: Optional[float] = None
    strict: bool = False
    label: str = "run"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least dt")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.dealias not in ("auto", "on", "off"):
            raise ValueError("dealias must be auto, on or off")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot stride must be >= 1")
        steps = self.n_steps  # validates divisibility
        if steps < 1:
            raise ValueError("no time steps to take")

    @property
    def n_steps(self) -> int:
        steps = round(self.t_final / self.dt)
        if abs(steps * self.dt - self.t_final) > 1e-9 * max(self.t_final, 1.0):
            raise ValueError(
                f"t_final = {self.t_final} is not an integer multiple of dt = {self.dt}")
        return steps

    def dealias_active(self) -> bool:
        if self.dealias == "on":
            return True
        if self.dealias == "off":
            return False
        return is_odd_integer(self.params.nu) and not self.linear_mode


@dataclass
class Trajectory:
    """Snapshots plus per-step diagnostic records of one integration."""

    params: EquationParams
    grid: PeriodicGrid
    method: str
    times: list
    states: list
    records: list
    status: str = "completed"
    status_time: Optional[float] = None
    high_band_alarm: bool = False
    config: Optional[RunConfig] = None
    picard_report: Optional["PicardReport"] = None

    def __post_init__(self):
        if not self.times or self.times[0] != 0.0:
            raise ValueError("trajectory must start at t = 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def kind(self) -> EquationKind:
        return self.params.kind

    def snapshots(self):
        return list(zip(self.times, self.states))

    def final_state(self):
        return self.states[-1]


@dataclass
class PicardReport:
    iterations: int
    diff_norms: list
    ratios: list
    contraction_factor: Optional[float]
    converged: bool
    tolerance: float

    def to_dict(self):
        return {"iterations": self.iterations,
                "diff_norms": self.diff_norms,
                "ratios": self.ratios,
                "contraction_factor": self.contraction_factor,
                "converged": self.converged,
                "tolerance": self.tolerance}


# ---------------------------------------------------------------------------
# pointwise nonlinear flows
# ---------------------------------------------------------------------------

def _amp_power(values: np.ndarray, nu: float) -> np.ndarray:
    """|u|^(nu-1) with the continuous convention 0^(nu-1) = 0."""
    mag2 = values.real ** 2 + values.imag ** 2
    return mag2 ** ((nu - 1.0) / 2.0)


def nonlinear_phase_step(field: Field, dt: float, params: EquationParams) -> Field:
    """Exact flow of i u_t = -mu |u|^(nu-1) u: a pure phase rotation, so |u|
    is pointwise invariant."""
    phase = np.exp(1j * params.mu * dt * _amp_power(field.values, float(params.nu)))
    return field.with_values(field.values * phase)


def _dealias_mask(grid: PeriodicGrid) -> np.ndarray:
    """Two-thirds-rule mask: True where a mode is kept."""
    keep = np.ones(grid.shape, dtype=bool)
    cap = grid.n // 3
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.n
        keep &= (np.abs(grid.modes) <= cap).reshape(shape)
    return keep


def _high_band_fraction(coeffs: np.ndarray, keep_mask: np.ndarray) -> float:
    total = float((np.abs(coeffs) ** 2).sum())
    if total == 0.0:
        return 0.0
    high = float((np.abs(coeffs[~keep_mask]) ** 2).sum())
    return high / total


# ---------------------------------------------------------------------------
# split-step Schrodinger
# ---------------------------------------------------------------------------

def step_nlfs(field: Field, dt: float, params: EquationParams,
              linear_mode: bool = False, dealias: bool = False) -> Field:
    """One Strang step: half nonlinear phase, exact linear flow, half phase.
    Works for dt of either sign (the scheme is its own inverse)."""
    grid = field.grid
    values = field.values
    nu, mu, sigma = float(params.nu), params.mu, float(params.sigma)
    if not linear_mode:
        values = values * np.exp(1j * mu * (dt / 2.0) * _amp_power(values, nu))
    coeffs = np.fft.fftn(values)
    coeffs *= np.exp(-1j * dt * grid.xi_magnitude() ** sigma)
    if dealias:
        coeffs = np.where(_dealias_mask(grid), coeffs, 0.0)
    values = np.fft.ifftn(coeffs)
    if not linear_mode:
        values = values * np.exp(1j * mu * (dt / 2.0) * _amp_power(values, nu))
    return field.with_values(values)


def integrate_nlfs(config: RunConfig) -> Trajectory:
    """Strang split-step integration of the fractional NLS flow, recording
    mass, energy, the monitor norm and the high-band fraction every step."""
    if config.params.kind is not EquationKind.NLFS:
        raise ValueError("integrate_nlfs needs NLFS parameters")
    grid = config.grid.build()
    u = config.initial.build(grid).values.copy()
    params = config.params
    nu, mu, sigma = float(params.nu), params.mu, float(params.sigma)
    dt = config.dt
    n_steps = config.n_steps
    dealias = config.dealias_active()
    keep = _dealias_mask(grid)
    lam = grid.xi_magnitude() ** sigma
    phase = np.exp(-1j * dt * lam)
    bracket_gamma = (config.gamma_monitor if config.gamma_monitor is not None
                     else sigma / 2.0)
    bracket_weight = (1.0 + grid.xi_magnitude() ** 2) ** bracket_gamma
    vol = grid.box_length ** grid.d

    def half_phase(values):
        if config.linear_mode:
            return values
        return values * np.exp(1j * mu * (dt / 2.0) * _amp_power(values, nu))

    def record(values, t):
        coeffs = np.fft.fftn(values) / grid.size
        f = Field(grid, values)
        rec = {
            "t": t,
            "mass": mass(f),
            "energy": 0.5 * vol * float((lam * np.abs(coeffs) ** 2).sum()),
            "monitor_norm": math.sqrt(
                vol * float((bracket_weight * np.abs(coeffs) ** 2).sum())),
            "high_band_fraction": _high_band_fraction(coeffs, keep),
        }
        if not config.linear_mode:
            nu1 = nu + 1.0
            rec["energy"] -= mu / nu1 * lebesgue_norm(f, nu1) ** nu1
        for spec in config.norms:
            rec[spec.label()] = spec.evaluate(f)
        return rec, f

    rec0, f0 = record(u, 0.0)
    records = [rec0]
    times, states = [0.0], [f0]
    status, status_time = "completed", None
    alarm = rec0["high_band_fraction"] > HIGH_BAND_ALARM
    ceiling = config.ceiling_factor * max(rec0["monitor_norm"], 1e-300)

    for j in range(1, n_steps + 1):
        u = half_phase(u)
        coeffs = np.fft.fftn(u)
        coeffs *= phase
        if dealias:
            coeffs = np.where(keep, coeffs, 0.0)
        u = np.fft.ifftn(coeffs)
        u = half_phase(u)
        t = j * dt
        if not np.all(np.isfinite(u.view(np.float64))):
            status, status_time = "blowup-suspected", t
            break
        rec, f = record(u, t)
        records.append(rec)
        alarm = alarm or rec["high_band_fraction"] > HIGH_BAND_ALARM
        if j % config.snapshot_stride == 0 or j == n_steps:
            times.append(t)
            states.append(f)
        if rec["monitor_norm"] > ceiling:
            status, status_time = "ceiling-exceeded", t
            if times[-1] != t:
                times.append(t)
                states.append(f)
            break

    return Trajectory(params, grid, "split-step", times, states, records,
                      status, status_time, alarm, config)


# ---------------------------------------------------------------------------
# trigonometric (impulse) wave integrator
# ---------------------------------------------------------------------------

def _wave_symbols(grid: PeriodicGrid, t: float, sigma: float):
    lam = grid.xi_magnitude() ** sigma
    cos_s = np.cos(t * lam)
    sinc_s = np.empty(grid.shape)
    nonzero = lam > 0
    sinc_s[nonzero] = np.sin(t * lam[nonzero]) / lam[nonzero]
    sinc_s[~nonzero] = t
    sin_s = lam * np.sin(t * lam)
    return cos_s, sinc_s, sin_s


def step_nlfw(state: WaveState, dt: float, params: EquationParams,
              linear_mode: bool = False, dealias: bool = False) -> WaveState:
    """One trigonometric step: half exact wave flow, midpoint impulse
    w += -mu dt F(v) routed through the second half flow's sinc entry, half
    exact wave flow. Composition of exact flows, hence time-reversible."""
    grid = state.grid
    sigma, nu, mu = float(params.sigma), float(params.nu), params.mu
    cos_s, sinc_s, sin_s = _wave_symbols(grid, dt / 2.0, sigma)
    v_hat = np.fft.fftn(state.position.values)
    w_hat = np.fft.fftn(state.velocity.values)
    v_hat, w_hat = cos_s * v_hat + sinc_s * w_hat, -sin_s * v_hat + cos_s * w_hat
    if not linear_mode:
        v_mid = np.fft.ifftn(v_hat)
        force = -mu * dt * _amp_power(v_mid, nu) * v_mid
        force_hat = np.fft.fftn(force)
        if dealias:
            force_hat = np.where(_dealias_mask(grid), force_hat, 0.0)
        w_hat = w_hat + force_hat
    v_hat, w_hat = cos_s * v_hat + sinc_s * w_hat, -sin_s * v_hat + cos_s * w_hat
    return WaveState(Field(grid, np.fft.ifftn(v_hat)),
                     Field(grid, np.fft.ifftn(w_hat)))


def integrate_nlfw(config: RunConfig) -> Trajectory:
    """Trigonometric integration of the fractional wave flow, recording the
    wave energy every step."""
    if config.params.kind is not EquationKind.NLFW:
        raise ValueError("integrate_nlfw needs NLFW parameters")
    grid = config.grid.build()
    params = config.params
    sigma, nu, mu = float(params.sigma), float(params.nu), params.mu
    v = config.initial.build(grid).values.copy()
    vel_spec = config.initial_velocity or InitialSpec(profile="zero")
    w = vel_spec.build(grid).values.copy()
    dt = config.dt
    n_steps = config.n_steps
    dealias = config.dealias_active()
    keep = _dealias_mask(grid)
    cos_s, sinc_s, sin_s = _wave_symbols(grid, dt / 2.0, sigma)
    lam2 = grid.xi_magnitude() ** (2.0 * sigma)
    bracket_gamma = (config.gamma_monitor if config.gamma_monitor is not None
                     else sigma)
    bracket_weight = (1.0 + grid.xi_magnitude() ** 2) ** bracket_gamma
    vol = grid.box_length ** grid.d

    def record(v_vals, w_vals, t):
        v_hat = np.fft.fftn(v_vals) / grid.size
        fv = Field(grid, v_vals)
        fw = Field(grid, w_vals)
        rec = {
            "t": t,
            "mass": mass(fv),
            "energy": 0.5 * mass(fw)
                      + 0.5 * vol * float((lam2 * np.abs(v_hat) ** 2).sum()),
            "monitor_norm": math.sqrt(
                vol * float((bracket_weight * np.abs(v_hat) ** 2).sum())),
            "high_band_fraction": _high_band_fraction(v_hat, keep),
        }
        if not config.linear_mode:
            nu1 = nu + 1.0
            rec["energy"] += mu / nu1 * lebesgue_norm(fv, nu1) ** nu1
        for spec in config.norms:
            rec[spec.label()] = spec.evaluate(fv)
        return rec, WaveState(fv, fw)

    rec0, s0 = record(v, w, 0.0)
    records = [rec0]
    times, states = [0.0], [s0]
    status, status_time = "completed", None
    alarm = rec0["high_band_fraction"] > HIGH_BAND_ALARM
    ceiling = config.ceiling_factor * max(rec0["monitor_norm"], 1e-300)

    v_hat = np.fft.fftn(v)
    w_hat = np.fft.fftn(w)
    for j in range(1, n_steps + 1):
        v_hat, w_hat = (cos_s * v_hat + sinc_s * w_hat,
                        -sin_s * v_hat + cos_s * w_hat)
        if not config.linear_mode:
            v_mid = np.fft.ifftn(v_hat)
            force = -mu * dt * _amp_power(v_mid, nu) * v_mid
            force_hat = np.fft.fftn(force)
            if dealias:
                force_hat = np.where(keep, force_hat, 0.0)
            w_hat = w_hat + force_hat
        v_hat, w_hat = (cos_s * v_hat + sinc_s * w_hat,
                        -sin_s * v_hat + cos_s * w_hat)
        t = j * dt
        v = np.fft.ifftn(v_hat)
        w = np.fft.ifftn(w_hat)
        if not (np.all(np.isfinite(v.view(np.float64)))
                and np.all(np.isfinite(w.view(np.float64)))):
            status, status_time = "blowup-suspected", t
            break
        rec, s = record(v, w, t)
        records.append(rec)
        alarm = alarm or rec["high_band_fraction"] > HIGH_BAND_ALARM
        if j % config.snapshot_stride == 0 or j == n_steps:
            times.append(t)
            states.append(s)
        if rec["monitor_norm"] > ceiling:
            status, status_time = "ceiling-exceeded", t
            if times[-1] != t:
                times.append(t)
                states.append(s)
            break

    return Trajectory(params, grid, "wave-trig", times, states, records,
                      status, status_time, alarm, config)


# ---------------------------------------------------------------------------
# Picard iteration on the Duhamel functionals
# ---------------------------------------------------------------------------

def _picard_grid(config: RunConfig):
    h = config.dt / config.picard.nodes_per_step
    m = config.n_steps * config.picard.nodes_per_step
    return h, m


def _factor_estimate(diffs, ratios, tol):
    usable = [r for d, r in zip(diffs[1:], ratios) if d > 50.0 * tol and r > 0]
    if not usable:
        return ratios[-1] if ratios else None
    return float(np.exp(np.mean(np.log(usable))))


def picard_solve_nlfs(config: RunConfig):
    """Fixed-point iteration on the Schrodinger Duhamel functional over a
    fixed time grid with composite-trapezoid quadrature; the integrand is
    propagated by the exact phase. Returns (Trajectory, PicardReport)."""
    if config.params.kind is not EquationKind.NLFS:
        raise ValueError("picard_solve_nlfs needs NLFS parameters")
    grid = config.grid.build()
    params = config.params
    nu, mu, sigma = float(params.nu), params.mu, float(params.sigma)
    h, m = _picard_grid(config)
    lam = grid.xi_magnitude() ** sigma
    vol = grid.box_length ** grid.d
    phi_hat = grid.forward(config.initial.build(grid).values)

    ts = np.arange(m + 1) * h
    fwd = [np.exp(-1j * t * lam) for t in ts]
    free = [f * phi_hat for f in fwd]
    u_hats = [f.copy() for f in free]

    spec = config.picard
    diffs, ratios = [], []
    converged = False
    for _ in range(spec.max_iters):
        if config.linear_mode:
            new_hats = [f.copy() for f in free]
        else:
            accum = np.zeros_like(phi_hat)
            prev_g = None
            new_hats = []
            for j in range(m + 1):
                u_phys = grid.inverse(u_hats[j])
                f_hat = grid.forward(_amp_power(u_phys, nu) * u_phys)
                g = np.conj(fwd[j]) * f_hat  # e^{+i t lam} F_hat
                if j > 0:
                    accum = accum + (h / 2.0) * (prev_g + g)
                prev_g = g
                new_hats.append(fwd[j] * (phi_hat + 1j * mu * accum))
        diff = max(
            math.sqrt(vol * float((np.abs(a - b) ** 2).sum()))
            for a, b in zip(new_hats, u_hats))
        u_hats = new_hats
        diffs.append(diff)
        if not math.isfinite(diff):
            raise NoContractionError(
                f"iterates diverged to non-finite values after {len(diffs)} "
                "iterations", diffs, ratios)
        if len(diffs) > 1 and diffs[-2] > 0:
            ratios.append(diffs[-1] / diffs[-2])
        if diff < spec.tolerance:
            converged = True
            break
    if not converged and ratios and ratios[-1] >= 1.0:
        raise NoContractionError(
            f"no contraction after {len(diffs)} iterations "
            f"(last ratio {ratios[-1]:.3g})", diffs, ratios)

    report = PicardReport(len(diffs), diffs, ratios,
                          _factor_estimate(diffs, ratios, spec.tolerance),
                          converged, spec.tolerance)

    stride_nodes = spec.nodes_per_step
    times, states, records = [], [], []
    for j in range(0, m + 1, stride_nodes):
        t = float(ts[j])
        f = Field.from_coefficients(grid, u_hats[j])
        step_index = j // stride_nodes
        records.append({"t": t, "mass": mass(f),
                        "energy": nlfs_energy(f, params,
                                              not config.linear_mode),
                        "picard_iterations": report.iterations,
                        "picard_factor": report.contraction_factor})
        if step_index % config.snapshot_stride == 0 or j == m:
            times.append(t)
            states.append(f)
    traj = Trajectory(params, grid, "picard", times, states, records,
                      "completed", None, False, config, report)
    return traj, report


def picard_solve_nlfw(config: RunConfig):
    """Fixed-point iteration on the wave Duhamel functional, with the
    trigonometric kernel split through angle addition so the running
    integrals are cumulative trapezoid sums. Returns (Trajectory, report)."""
    if config.params.kind is not EquationKind.NLFW:
        raise ValueError("picard_solve_nlfw needs NLFW parameters")
    grid = config.grid.build()
    params = config.params
    nu, mu, sigma = float(params.nu), params.mu, float(params.sigma)
    h, m = _picard_grid(config)
    lam = grid.xi_magnitude() ** sigma
    nonzero = lam > 0
    vol = grid.box_length ** grid.d
    phi_hat = grid.forward(config.initial.build(grid).values)
    vel_spec = config.initial_velocity or InitialSpec(profile="zero")
    psi_hat = grid.forward(vel_spec.build(grid).values)

    ts = np.arange(m + 1) * h

    def symbols(t):
        cos_s = np.cos(t * lam)
        sinc_s = np.empty(grid.shape)
        sinc_s[nonzero] = np.sin(t * lam[nonzero]) / lam[nonzero]
        sinc_s[~nonzero] = t
        return cos_s, sinc_s

    syms = [symbols(t) for t in ts]
    free_pos = [c * phi_hat + s * psi_hat for c, s in syms]
    free_vel = [-lam * np.sin(t * lam) * phi_hat + c * psi_hat
                for (c, _), t in zip(syms, ts)]
    pos_hats = [f.copy() for f in free_pos]
    vel_hats = [f.copy() for f in free_vel]

    spec = config.picard
    diffs, ratios = [], []
    converged = False
    for _ in range(spec.max_iters):
        if config.linear_mode:
            new_pos = [f.copy() for f in free_pos]
            new_vel = [f.copy() for f in free_vel]
        else:
            c_acc = np.zeros_like(phi_hat)   # integral of cos(s lam) F_hat
            s_acc = np.zeros_like(phi_hat)   # integral of sinc(s) F_hat
            prev_c = prev_s = None
            new_pos, new_vel = [], []
            for j in range(m + 1):
                v_phys = grid.inverse(pos_hats[j])
                f_hat = grid.forward(_amp_power(v_phys, nu) * v_phys)
                cos_j, sinc_j = syms[j]
                gc = cos_j * f_hat
                gs = sinc_j * f_hat
                if j > 0:
                    c_acc = c_acc + (h / 2.0) * (prev_c + gc)
                    s_acc = s_acc + (h / 2.0) * (prev_s + gs)
                prev_c, prev_s = gc, gs
                sin_j = np.sin(ts[j] * lam)
                new_pos.append(free_pos[j] - mu * (sinc_j * c_acc - cos_j * s_acc))
                new_vel.append(free_vel[j] - mu * (cos_j * c_acc + sin_j * lam * s_acc))
        diff = max(
            math.sqrt(vol * float((np.abs(a - b) ** 2).sum()))
            + math.sqrt(vol * float((np.abs(c - d) ** 2).sum()))
            for a, b, c, d in zip(new_pos, pos_hats, new_vel, vel_hats))
        pos_hats, vel_hats = new_pos, new_vel
        diffs.append(diff)
        if not math.isfinite(diff):
            raise NoContractionError(
                f"iterates diverged to non-finite values after {len(diffs)} "
                "iterations", diffs, ratios)
        if len(diffs) > 1 and diffs[-2] > 0:
            ratios.append(diffs[-1] / diffs[-2])
        if diff < spec.tolerance:
            converged = True
            break
    if not converged and ratios and ratios[-1] >= 1.0:
        raise NoContractionError(
            f"no contraction after {len(diffs)} iterations "
            f"(last ratio {ratios[-1]:.3g})", diffs, ratios)

    report = PicardReport(len(diffs), diffs, ratios,
                          _factor_estimate(diffs, ratios, spec.tolerance),
                          converged, spec.tolerance)

    stride_nodes = spec.nodes_per_step
    times, states, records = [], [], []
    for j in range(0, m + 1, stride_nodes):
        t = float(ts[j])
        state = WaveState(Field.from_coefficients(grid, pos_hats[j]),
                          Field.from_coefficients(grid, vel_hats[j]))
        step_index = j // stride_nodes
        records.append({"t": t, "mass": mass(state.position),
                        "energy": nlfw_energy(state, params,
                                              not config.linear_mode),
                        "picard_iterations": report.iterations,
                        "picard_factor": report.contraction_factor})
        if step_index % config.snapshot_stride == 0 or j == m:
            times.append(t)
            states.append(state)
    traj = Trajectory(params, grid, "picard", times, states, records,
                      "completed", None, False, config, report)
    return traj, report


# ---------------------------------------------------------------------------
# dispatch and twin-run helpers
# ---------------------------------------------------------------------------

def integrate(config: RunConfig) -> Trajectory:
    """Run a configuration with its configured method."""
    if config.method == "split-step":
        return integrate_nlfs(config)
    if config.method == "wave-trig":
        return integrate_nlfw(config)
    if config.params.kind is EquationKind.NLFS:
        return picard_solve_nlfs(config)[0]
    return picard_solve_nlfw(config)[0]


def rescaled_twin_config(config: RunConfig, lam: float) -> RunConfig:
    """The lam-rescaled twin: initial data rescaled by the flow's scaling
    symmetry, box lam*L, time step and horizon dilated by lam^sigma."""
    grid = config.grid.build()
    params = config.params
    base = config.initial.build(grid)
    twin_initial = InitialSpec(profile="field",
                               field_value=rescale_field(base, lam, params))
    twin_velocity = None
    if params.kind is EquationKind.NLFW:
        vel_spec = config.initial_velocity or InitialSpec(profile="zero")
        vel = vel_spec.build(grid)
        weight = float(scaling_weight(params)) + float(params.sigma)
        twin_grid = PeriodicGrid(grid.d, grid.n, grid.box_length * float(lam))
        twin_velocity = InitialSpec(
            profile="field",
            field_value=Field(twin_grid, vel.values * float(lam) ** (-weight)))
    dilation = float(lam) ** float(params.sigma)
    return replace(
        config,
        grid=GridSpec(grid.d, grid.n, grid.box_length * float(lam)),
        initial=twin_initial,
        initial_velocity=twin_velocity,
        dt=config.dt * dilation,
        t_final=config.t_final * dilation,
        label=config.label + f"-twin-lam{lam:g}",
    )
