"""Verification diagnostics: conserved quantities, scaling covariance,
dispersive decay fitting, blowup/scattering monitors, and empirical samplers
for the fractional Leibniz / chain-rule / power-nonlinearity inequalities.

Everything here consumes fields, states, or finished trajectories; nothing
mutates them. The inequality samplers return measured left/right sides with
the (unquantified) constant stripped, so suites can track ratio stability
under grid refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exponents import (EquationKind, EquationParams, HypothesisError,
                        as_exponent, ceil_pos, inv, is_odd_integer)
from .lpnorms import h_dot_sq, lebesgue_norm, sobolev_norm
from .spectral import (Field, PeriodicGrid, WaveState, apply_multiplier,
                       schrodinger_phase, schrodinger_propagate)


class WraparoundAlarm(RuntimeError):
    """Periodic images contaminate a probe that models free space."""


class UnderResolvedError(RuntimeError):
    """A run tripped the high-band monitor; results are not trustworthy."""


# ---------------------------------------------------------------------------
# conserved quantities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConservedSet:
    mass: float
    energy: float
    time: float = 0.0


def mass(field: Field) -> float:
    """L^2 mass integral |u|^2 dx."""
    return float(field.grid.cell_volume * (np.abs(field.values) ** 2).sum())


def nlfs_energy(field: Field, params: EquationParams,
                include_potential: bool = True) -> float:
    """1/2 ||Lam^(s/2) u||^2 - mu/(nu+1) ||u||_{nu+1}^{nu+1}.

    The potential sign is the one the flow i u_t = Lam^s u - mu |u|^(nu-1) u
    actually conserves (d/dt of the +mu variant is nonzero); the coercive,
    globally bounded case under this convention is mu = -1.
    """
    kinetic = 0.5 * h_dot_sq(field, float(params.sigma) / 2.0)
    if not include_potential:
        return kinetic
    nu1 = float(params.nu) + 1.0
    potential = -params.mu / nu1 * lebesgue_norm(field, nu1) ** nu1
    return kinetic + potential


def nlfw_energy(state: WaveState, params: EquationParams,
                include_potential: bool = True) -> float:
    """1/2 ||w||^2 + 1/2 ||Lam^s v||^2 + mu/(nu+1) ||v||_{nu+1}^{nu+1}."""
    kinetic = 0.5 * mass(state.velocity) + 0.5 * h_dot_sq(state.position,
                                                          float(params.sigma))
    if not include_potential:
        return kinetic
    nu1 = float(params.nu) + 1.0
    potential = params.mu / nu1 * lebesgue_norm(state.position, nu1) ** nu1
    return kinetic + potential


def conserved_set(state, params: EquationParams, time: float = 0.0,
                  include_potential: bool = True) -> ConservedSet:
    """Mass and flow energy of a Field (NLFS) or WaveState (NLFW).

    For wave states the mass entry records the position's L^2 mass, which is
    monitored but not conserved by the second-order flow.
    """
    if isinstance(state, WaveState):
        return ConservedSet(mass(state.position),
                            nlfw_energy(state, params, include_potential), time)
    return ConservedSet(mass(state), nlfs_energy(state, params, include_potential),
                        time)


def state_sobolev_norm(state, gamma: float, params: EquationParams) -> float:
    """H^g norm of a Field, or the bracket norm ||v||_{H^g} + ||w||_{H^(g-s)}
    of a WaveState."""
    if isinstance(state, WaveState):
        return (sobolev_norm(state.position, gamma, 2)
                + sobolev_norm(state.velocity, gamma - float(params.sigma), 2))
    return sobolev_norm(state, gamma, 2)


# ---------------------------------------------------------------------------
# scaling symmetry
# ---------------------------------------------------------------------------

def scaling_weight(params: EquationParams) -> Fraction:
    """Amplitude exponent of the scaling symmetry: sigma/(nu-1) for the
    Schrodinger flow, 2*sigma/(nu-1) for the wave flow."""
    times = 2 if params.kind is EquationKind.NLFW else 1
    return times * params.sigma / (params.nu - 1)


def rescale_field(field: Field, lam: float, params: EquationParams) -> Field:
    """The t = 0 slice of the scaling symmetry: lam^-w * u(x / lam) on the
    grid with box length lam * L (same sample count).

    lam must be an integer power of two so the rescaled function stays
    grid-commensurate. The homogeneous-norm scaling law is verified
    internally at gamma = 0 before returning.
    """
    m = math.log2(lam)
    if abs(m - round(m)) > 1e-12:
        raise ValueError(f"scale factor must be a power of two, got {lam}")
    lam = float(lam)
    grid = field.grid
    new_grid = PeriodicGrid(grid.d, grid.n, grid.box_length * lam)
    weight = float(scaling_weight(params))
    out = Field(new_grid, field.values * lam ** (-weight))
    if lam != 1.0:
        before = math.sqrt(h_dot_sq(field, 0.0))
        after = math.sqrt(h_dot_sq(out, 0.0))
        if before > 0:
            measured = math.log(after / before) / math.log(lam)
            target = grid.d / 2.0 - weight
            if abs(measured - target) > 1e-8:
                raise AssertionError(
                    f"rescaling norm law violated: measured exponent {measured!r} "
                    f"vs {target!r}")
    return out


def rescale_norm_exponent(field: Field, lam: float, params: EquationParams,
                          gamma: float) -> float:
    """Measured exponent log_lam of ||u_lam||_{Hdot^g} / ||u||_{Hdot^g};
    equals d/2 - w - g up to round-off."""
    if lam == 1.0:
        raise ValueError("lam = 1 carries no scaling information")
    out = rescale_field(field, lam, params)
    before = math.sqrt(h_dot_sq(field, gamma))
    after = math.sqrt(h_dot_sq(out, gamma))
    return math.log(after / before) / math.log(float(lam))


def scaling_covariance_check(config, lam: float, return_details: bool = False):
    """Run a configuration and its lam-rescaled twin; return the max over
    checkpoints of the relative L^2 deviation from exact scaling covariance.

    The twin uses box lam*L, time step lam^sigma * dt, and horizon
    lam^sigma * t_final, so checkpoint indices align one-to-one.
    """
    from . import evolution  # imported here: evolution depends on this module

    base_traj = evolution.integrate(config)
    if base_traj.high_band_alarm:
        raise UnderResolvedError("base run tripped the high-band monitor")
    twin = evolution.rescaled_twin_config(config, lam)
    twin_traj = evolution.integrate(twin)
    if twin_traj.high_band_alarm:
        raise UnderResolvedError("rescaled run tripped the high-band monitor")

    weight = float(scaling_weight(config.params))
    worst = 0.0
    details = []
    for (t0, s0), (t1, s1) in zip(base_traj.snapshots(), twin_traj.snapshots()):
        pairs = ([(s0, s1, weight)] if isinstance(s0, Field) else
                 [(s0.position, s1.position, weight),
                  (s0.velocity, s1.velocity, weight + float(config.params.sigma))])
        for ref_field, twin_field, w in pairs:
            predicted = float(lam) ** (-w) * ref_field.values
            denom = float(np.linalg.norm(predicted))
            diff = float(np.linalg.norm(twin_field.values - predicted))
            rel = diff / denom if denom > 0 else diff
            worst = max(worst, rel)
        details.append({"t": t1, "rel_l2": worst})
    if return_details:
        return worst, details
    return worst


# ---------------------------------------------------------------------------
# dispersive decay probe
# ---------------------------------------------------------------------------

def edge_ratio(field: Field, shell: float = 0.05) -> float:
    """Sup of |u| on the outermost `shell` fraction near the periodic seam,
    relative to the global sup."""
    mags = np.abs(field.values)
    peak = float(mags.max())
    if peak == 0.0:
        return 0.0
    n = field.grid.n
    width = max(1, int(round(shell * n / 2)))
    edge = 0.0
    for axis in range(field.grid.d):
        sl_lo = [slice(None)] * field.grid.d
        sl_hi = [slice(None)] * field.grid.d
        sl_lo[axis] = slice(0, width)
        sl_hi[axis] = slice(n - width, n)
        edge = max(edge, float(mags[tuple(sl_lo)].max()),
                   float(mags[tuple(sl_hi)].max()))
    return edge / peak


def dispersive_decay_probe(d: int, sigma: float, times: Sequence[float],
                           box_length: float, n: int,
                           wrap_tol: float = 1e-6, return_details: bool = False):
    """Fit the sup-norm decay exponent of the free flow on band-one data.

    Applies the free Schrodinger propagator to a frequency-localized packet
    at each positive, increasing probe time, records sup norms, and returns
    the least-squares slope of log||u||_inf against log(1 + t). Raises
    WraparoundAlarm if any snapshot's seam amplitude exceeds wrap_tol of its
    peak (the torus is then too small to model free space).
    """
    from .profiles import band_profile
    from .spectral import make_grid

    times = [float(t) for t in times]
    if not times or any(t <= 0 for t in times):
        raise ValueError("probe times must be positive")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("probe times must be increasing")
    grid = make_grid(d, n, box_length)
    data = band_profile(grid, scale=1.0)
    if edge_ratio(data) > wrap_tol:
        raise WraparoundAlarm("initial packet already touches the seam")
    sups = []
    for t in times:
        u = schrodinger_propagate(data, t, sigma)
        ratio = edge_ratio(u)
        if ratio > wrap_tol:
            raise WraparoundAlarm(
                f"wraparound at t={t}: seam amplitude ratio {ratio:.3e}")
        sups.append(float(np.abs(u.values).max()))
    xs = np.log1p(times)
    ys = np.log(sups)
    slope, intercept = np.polyfit(xs, ys, 1)
    if return_details:
        return float(slope), {"times": times, "sup_norms": sups,
                              "intercept": float(intercept)}
    return float(slope)


# ---------------------------------------------------------------------------
# trajectory monitors
# ---------------------------------------------------------------------------

def scattering_monitor(trajectory, params: EquationParams, gamma: float):
    """Cauchy increments ||w(t_{j+1}) - w(t_j)||_{H^g} of the back-propagated
    state w(t) = e^{+i t Lam^s} u(t); identically zero for the free flow."""
    if trajectory.kind is not EquationKind.NLFS:
        raise ValueError("scattering monitor applies to Schrodinger trajectories")
    sigma = float(params.sigma)
    increments = []
    prev = None
    prev_t = None
    for t, state in trajectory.snapshots():
        w = apply_multiplier(state, schrodinger_phase(-t, sigma))
        if prev is not None:
            diff = w.with_values(w.values - prev.values)
            increments.append({"t0": prev_t, "t1": t,
                               "increment": sobolev_norm(diff, gamma, 2)})
        prev, prev_t = w, t
    return increments


@dataclass(frozen=True)
class BlowupStatus:
    status: str                  # completed | ceiling-exceeded | non-finite
    time: Optional[float]
    history: list                # (t, H^g norm) pairs


def blowup_monitor(trajectory, gamma: float) -> BlowupStatus:
    """Status of a run against the norm-ceiling / non-finite aborts, with the
    H^g norm history along the snapshots."""
    history = [(t, state_sobolev_norm(s, gamma, trajectory.params))
               for t, s in trajectory.snapshots()]
    status = trajectory.status
    if status == "blowup-suspected":
        status = "non-finite"
    return BlowupStatus(status, trajectory.status_time, history)


# ---------------------------------------------------------------------------
# nonlinear-estimate samplers
# ---------------------------------------------------------------------------

INEQUALITY_KINDS = ("kato-ponce", "chain-rule", "power-estimate",
                    "power-difference")


@dataclass(frozen=True)
class InequalitySample:
    lhs: float
    rhs_without_constant: float
    descriptor: dict = dc_field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs_without_constant


def _hnorm(field: Field, gamma: float, q) -> float:
    """Homogeneous-Sobolev sampler norm; gamma = 0 is the plain L^q norm."""
    if gamma == 0:
        return lebesgue_norm(field, q)
    return sobolev_norm(field, gamma, q, homogeneous=True, remove_mean=True)


def _check_scaling(label: str, left, parts) -> None:
    got = sum(inv(as_exponent(p)) for p in parts)
    want = inv(as_exponent(left))
    if abs(float(got) - float(want)) > 1e-12:
        raise HypothesisError(
            f"{label}: exponent relation violated, 1/{left} != "
            + " + ".join(f"1/{p}" for p in parts))


def _power(values: np.ndarray, nu: float) -> np.ndarray:
    """|z|^(nu-1) z with 0^(nu-1) = 0 (continuous since nu > 1)."""
    mag2 = values.real ** 2 + values.imag ** 2
    return mag2 ** ((nu - 1.0) / 2.0) * values


def kato_ponce_sample(u: Field, v: Field, gamma: float, r, p1, q1, p2, q2):
    """Fractional Leibniz rule: ||Lam^g(uv)||_r vs
    ||Lam^g u||_p1 ||v||_q1 + ||u||_p2 ||Lam^g v||_q2."""
    if gamma < 0:
        raise HypothesisError("Leibniz sampler needs gamma >= 0")
    _check_scaling("kato-ponce", r, (p1, q1))
    _check_scaling("kato-ponce", r, (p2, q2))
    product = u.with_values(u.values * v.values)
    lhs = _hnorm(product, gamma, r)
    rhs = (_hnorm(u, gamma, p1) * lebesgue_norm(v, q1)
           + lebesgue_norm(u, p2) * _hnorm(v, gamma, q2))
    return InequalitySample(lhs, rhs, {"kind": "kato-ponce", "gamma": gamma,
                                       "r": float(r)})


def chain_rule_sample(u: Field, gamma: float, nu: float, r, p, q,
                      analytic: bool = False):
    """Fractional chain rule for the power map: ||Lam^g F(u)||_r vs
    |||u|^(nu-1)||_q ||Lam^g u||_p, F(u) = |u|^(nu-1) u (or u^nu when
    `analytic` and nu is an integer)."""
    if not (0 < gamma < 1):
        raise HypothesisError("chain-rule sampler needs gamma in (0,1)")
    _check_scaling("chain-rule", r, (p, q))
    nu = float(nu)
    if analytic:
        if abs(nu - round(nu)) > 0:
            raise HypothesisError("analytic power needs integer nu")
        fu = u.with_values(u.values ** int(round(nu)))
    else:
        fu = u.with_values(_power(u.values, nu))
    lhs = _hnorm(fu, gamma, r)
    derivative_mag = u.with_values(
        (u.values.real ** 2 + u.values.imag ** 2) ** ((nu - 1.0) / 2.0) + 0j)
    rhs = lebesgue_norm(derivative_mag, q) * _hnorm(u, gamma, p)
    return InequalitySample(lhs, rhs, {"kind": "chain-rule", "gamma": gamma,
                                       "nu": nu, "analytic": analytic})


def power_estimate_sample(u: Field, gamma: float, nu: float, r, p, q):
    """||F(u)||_{Hdot^g_r} vs ||u||_q^(nu-1) ||u||_{Hdot^g_p} for the power
    nonlinearity; hypothesis ceil_pos(gamma) <= nu unless nu is odd."""
    if gamma < 0:
        raise HypothesisError("power-estimate sampler needs gamma >= 0")
    if not is_odd_integer(Fraction(nu)) and ceil_pos(gamma) > nu:
        raise HypothesisError(
            f"power estimate needs ceil(gamma) = {ceil_pos(gamma)} <= nu = {nu}")
    _check_scaling_power(r, p, q, nu)
    fu = u.with_values(_power(u.values, float(nu)))
    lhs = _hnorm(fu, gamma, r)
    rhs = lebesgue_norm(u, q) ** (float(nu) - 1.0) * _hnorm(u, gamma, p)
    return InequalitySample(lhs, rhs, {"kind": "power-estimate", "gamma": gamma,
                                       "nu": float(nu)})


def power_difference_sample(u: Field, v: Field, gamma: float, nu: float, r, p, q):
    """Difference estimate for the power map; hypothesis
    ceil_pos(gamma) <= nu - 1 unless nu is odd."""
    if gamma < 0:
        raise HypothesisError("power-difference sampler needs gamma >= 0")
    if not is_odd_integer(Fraction(nu)) and ceil_pos(gamma) > nu - 1:
        raise HypothesisError(
            f"power difference needs ceil(gamma) = {ceil_pos(gamma)} <= nu - 1")
    _check_scaling_power(r, p, q, nu)
    nu = float(nu)
    fu = u.with_values(_power(u.values, nu))
    fv = v.with_values(_power(v.values, nu))
    diff = u.with_values(fu.values - fv.values)
    lhs = _hnorm(diff, gamma, r)
    uq, vq = lebesgue_norm(u, q), lebesgue_norm(v, q)
    up, vp = _hnorm(u, gamma, p), _hnorm(v, gamma, p)
    dq = lebesgue_norm(u.with_values(u.values - v.values), q)
    dp = _hnorm(u.with_values(u.values - v.values), gamma, p)
    rhs = ((uq ** (nu - 1.0) + vq ** (nu - 1.0)) * dp
           + (uq ** (nu - 2.0) + vq ** (nu - 2.0)) * (up + vp) * dq)
    return InequalitySample(lhs, rhs, {"kind": "power-difference", "gamma": gamma,
                                       "nu": nu})


def _check_scaling_power(r, p, q, nu):
    got = inv(as_exponent(p)) + (Fraction(nu) - 1) * inv(as_exponent(q))
    want = inv(as_exponent(r))
    if abs(float(got) - float(want)) > 1e-12:
        raise HypothesisError(
            f"power sampler: 1/{r} != 1/{p} + (nu-1)/{q} with nu={nu}")


def inequality_sample(kind: str, exponents: dict, fields: Sequence[Field]):
    """Dispatch one inequality sample; `exponents` carries the named tuple
    entries of the chosen kind (gamma, r, p, q, ... as documented on the
    individual samplers)."""
    if kind not in INEQUALITY_KINDS:
        raise KeyError(f"unknown inequality kind {kind!r}")
    if kind == "kato-ponce":
        return kato_ponce_sample(fields[0], fields[1], **exponents)
    if kind == "chain-rule":
        return chain_rule_sample(fields[0], **exponents)
    if kind == "power-estimate":
        return power_estimate_sample(fields[0], **exponents)
    return power_difference_sample(fields[0], fields[1], **exponents)
