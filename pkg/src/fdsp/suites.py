"""Named verification suites behind the `verify` CLI command.

Each suite runs a battery of checks at the tolerances fixed here and
returns a verdict dict:

    {"suite": name, "passed": bool,
     "checks": [{"id", "passed", "measured", "tolerance", "comparator"}...],
     "tables": {table_name: {"columns": [...], "rows": [[...]...]}}}

The tables are plot-ready detail data (the CLI writes them as CSV files and
the report command renders figures from them). Every suite is seeded and
deterministic.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import diagnostics, evolution, profiles
from .evolution import GridSpec, InitialSpec, RunConfig
from .exponents import EquationKind, EquationParams, HypothesisError
from .lpnorms import (ALT_CUTOFF, STANDARD_CUTOFF, besov_norm,
                      coverage_leakage, lebesgue_norm, project_all,
                      sobolev_norm)

SUITES = ("conservation", "scaling", "dispersive", "inequalities", "scattering")


def _check(cid, measured, tolerance, comparator="<", soft=False, **extra):
    if comparator == "in":
        ok = tolerance[0] <= measured <= tolerance[1]
    elif comparator == "<":
        ok = measured < tolerance
    elif comparator == "<=":
        ok = measured <= tolerance
    else:
        ok = measured > tolerance
    entry = {"id": cid, "measured": measured, "comparator": comparator,
             "tolerance": list(tolerance) if comparator == "in" else tolerance,
             "passed": bool(ok) or soft, "soft": soft}
    if soft:
        entry["observed_pass"] = bool(ok)
    entry.update(extra)
    return entry


def _verdict(name, checks, tables=None):
    return {"suite": name,
            "passed": all(c["passed"] for c in checks),
            "checks": checks,
            "tables": tables or {}}


def reference_nlfs_config(sigma=2, mu=1, dt=1e-3, t_final=1.0, n=256,
                          amplitude=0.4, width=1.5, nu=3,
                          kind=EquationKind.NLFS, method=None, **kw):
    params = EquationParams(1, sigma, nu, mu, kind)
    if method is None:
        method = "wave-trig" if kind is EquationKind.NLFW else "split-step"
    kw.setdefault("snapshot_stride", 100)
    return RunConfig(params, GridSpec(1, n, 8 * math.pi),
                     InitialSpec("gaussian", amplitude=amplitude, width=width),
                     dt=dt, t_final=t_final, method=method, **kw)


# ---------------------------------------------------------------------------
# conservation
# ---------------------------------------------------------------------------

def suite_conservation(sigmas=(0.75, 1.5, 2, 4), t_final=1.0, config=None):
    """Cubic defocusing runs on the reference Gaussian: mass drift < 1e-10
    and energy drift < 1e-6 for the Schrodinger flow (dt = 1e-3), wave
    energy drift < 1e-6 for the wave flow (dt = 5e-4). With an explicit
    `config`, the drift checks run on that configuration instead."""
    checks = []
    rows = []
    if config is not None:
        traj = evolution.integrate(config)
        masses = [r["mass"] for r in traj.records]
        energies = [r["energy"] for r in traj.records]
        mdrift = max(abs(v - masses[0]) for v in masses) / masses[0]
        edrift = (max(abs(v - energies[0]) for v in energies)
                  / (abs(energies[0]) + 1e-30))
        kind = config.params.kind.value
        if kind == "nlfs":
            checks.append(_check("mass-drift", mdrift, 1e-10))
        checks.append(_check("energy-drift", edrift, 1e-6))
        for rec in traj.records[:: max(1, len(traj.records) // 100)]:
            rows.append([kind, float(config.params.sigma), rec["t"],
                         (rec["mass"] - masses[0]) / masses[0],
                         (rec["energy"] - energies[0]) / (abs(energies[0]) + 1e-30)])
        tables = {"drift": {"columns": ["flow", "sigma", "t", "mass_drift",
                                        "energy_drift"], "rows": rows}}
        return _verdict("conservation", checks, tables)
    for sigma in sigmas:
        cfg = reference_nlfs_config(sigma=sigma, t_final=t_final)
        traj = evolution.integrate_nlfs(cfg)
        masses = [r["mass"] for r in traj.records]
        energies = [r["energy"] for r in traj.records]
        mdrift = max(abs(v - masses[0]) for v in masses) / masses[0]
        edrift = (max(abs(v - energies[0]) for v in energies)
                  / (abs(energies[0]) + 1e-30))
        checks.append(_check(f"nlfs-mass-drift-sigma={sigma}", mdrift, 1e-10))
        checks.append(_check(f"nlfs-energy-drift-sigma={sigma}", edrift, 1e-6))
        for rec in traj.records[:: max(1, len(traj.records) // 100)]:
            rows.append(["nlfs", sigma, rec["t"],
                         (rec["mass"] - masses[0]) / masses[0],
                         (rec["energy"] - energies[0]) / (abs(energies[0]) + 1e-30)])

        wcfg = reference_nlfs_config(sigma=sigma, t_final=t_final, dt=5e-4,
                                     kind=EquationKind.NLFW)
        wtraj = evolution.integrate_nlfw(wcfg)
        wenergies = [r["energy"] for r in wtraj.records]
        wdrift = (max(abs(v - wenergies[0]) for v in wenergies)
                  / (abs(wenergies[0]) + 1e-30))
        checks.append(_check(f"nlfw-energy-drift-sigma={sigma}", wdrift, 1e-6))
        for rec in wtraj.records[:: max(1, len(wtraj.records) // 100)]:
            rows.append(["nlfw", sigma, rec["t"], "",
                         (rec["energy"] - wenergies[0]) / (abs(wenergies[0]) + 1e-30)])
    tables = {"drift": {"columns": ["flow", "sigma", "t", "mass_drift",
                                    "energy_drift"], "rows": rows}}
    return _verdict("conservation", checks, tables)


# ---------------------------------------------------------------------------
# scaling covariance
# ---------------------------------------------------------------------------

def suite_scaling(lam=2.0, config=None):
    """Twin-run covariance under the scaling symmetry (linear < 1e-10,
    small-data cubic < 1e-6) plus the rescaling norm-exponent law at
    gamma in {0, sigma/2, gamma_s, 1} to 1e-6. With an explicit `config`,
    the twin runs use that configuration (and its linear mode)."""
    checks = []
    rows = []
    lin = (dataclasses.replace(config, linear_mode=True) if config is not None
           else reference_nlfs_config(sigma=1.5, t_final=0.25, dt=1e-3,
                                      linear_mode=True))
    dev = diagnostics.scaling_covariance_check(lin, lam)
    checks.append(_check("twin-linear", dev, 1e-10))
    rows.append(["linear", lam, dev])

    nl = (config if config is not None
          else reference_nlfs_config(sigma=1.5, amplitude=0.2, t_final=0.25,
                                     dt=1e-3))
    dev_nl = diagnostics.scaling_covariance_check(nl, lam)
    checks.append(_check("twin-cubic", dev_nl, 1e-6))
    rows.append(["cubic", lam, dev_nl])

    params = EquationParams(1, 1.5, 3, 1)
    grid = GridSpec(1, 256, 8 * math.pi).build()
    base = profiles.gaussian(grid, 0.7, 1.1)
    gamma_s = float(params.d) / 2 - float(params.sigma) / (float(params.nu) - 1)
    for gamma in (0.0, float(params.sigma) / 2, gamma_s, 1.0):
        for lam_k in (2.0, 4.0):
            measured = diagnostics.rescale_norm_exponent(base, lam_k, params, gamma)
            target = params.d / 2 - float(params.sigma) / (float(params.nu) - 1) - gamma
            err = abs(measured - target)
            checks.append(_check(f"rescale-exponent-gamma={gamma:g}-lam={lam_k:g}",
                                 err, 1e-6))
            rows.append([f"exponent-gamma={gamma:g}", lam_k, err])
    tables = {"scaling": {"columns": ["case", "lambda", "value"], "rows": rows}}
    return _verdict("scaling", checks, tables)


# ---------------------------------------------------------------------------
# dispersive decay
# ---------------------------------------------------------------------------

DECAY_CASES = (
    # d, sigma, box, n, probe times (asymptotic dyadic window per case)
    (1, 0.5, 2048.0, 16384, (64.0, 128.0, 256.0, 512.0, 1024.0)),
    (1, 1.5, 2048.0, 16384, (16.0, 32.0, 64.0, 128.0, 256.0)),
    (2, 1.5, 1024.0, 2048, (16.0, 32.0, 64.0, 128.0)),
)


def suite_dispersive(cases=DECAY_CASES, band=0.2):
    """Sup-norm decay exponent of the frequency-localized free flow fits
    -d/2 within +-band, with the wraparound alarm silent."""
    checks = []
    rows = []
    for d, sigma, box, n, times in cases:
        slope, details = diagnostics.dispersive_decay_probe(
            d, sigma, list(times), box, n, return_details=True)
        target = -d / 2.0
        checks.append(_check(f"decay-exponent-d={d}-sigma={sigma}", slope,
                             (target - band, target + band), "in"))
        for t, s in zip(details["times"], details["sup_norms"]):
            rows.append([d, sigma, t, s, slope, target])
    tables = {"decay": {"columns": ["d", "sigma", "t", "sup_norm", "fitted",
                                    "target"], "rows": rows}}
    return _verdict("dispersive", checks, tables)


# ---------------------------------------------------------------------------
# nonlinear-estimate inequality suites
# ---------------------------------------------------------------------------

def _sample_fields(grid, count, seed0, modes_cap):
    fields = []
    for i in range(count):
        alpha = (0.0, 1.0, 2.0)[i % 3]
        fields.append(profiles.random_field(grid, seed0 + i, alpha=alpha,
                                            modes_cap=modes_cap))
    # deterministic profiles, detuned by the seed so paired suites differ
    detune = 1.0 + (seed0 % 997) / 1000.0
    g = profiles.gaussian(grid, detune, grid.box_length / 10)
    p = profiles.plane_wave(grid, detune, 2 + (seed0 // 1000) % 3)
    b = profiles.bump(grid, detune, grid.box_length / 12)
    return fields + [g, p, b]


def _max_ratio(kind, fields, pair_fields, **kw):
    worst = 0.0
    for i, u in enumerate(fields):
        args = [u, pair_fields[i]] if pair_fields is not None else [u]
        sample = diagnostics.inequality_sample(kind, kw, args)
        worst = max(worst, sample.ratio)
    return worst


def suite_inequalities(samples=60, n=128, box=2 * math.pi * 4):
    """Empirical fractional Leibniz / chain-rule / power-estimate ratios:
    exact Holder at gamma = 0, ratio stability under grid refinement, and
    hypothesis guards rejecting invalid exponent tuples."""
    checks = []
    rows = []
    grid = GridSpec(1, n, box).build()
    fine = GridSpec(1, 2 * n, box).build()
    cap = n // 4
    coarse_fields = _sample_fields(grid, samples, 1000, cap)
    fine_fields = _sample_fields(fine, samples, 1000, cap)
    coarse_pairs = _sample_fields(grid, samples, 5000, cap)
    fine_pairs = _sample_fields(fine, samples, 5000, cap)

    # gamma = 0 power estimate reduces to the exact discrete Holder inequality
    hol = _max_ratio("power-estimate", coarse_fields, None,
                     gamma=0.0, nu=3.0, r=2, p=6, q=6)
    checks.append(_check("holder-power-gamma0", hol, 1.0 + 1e-10, "<="))
    hol_kp = _max_ratio("kato-ponce", coarse_fields, coarse_pairs,
                        gamma=0.0, r=2, p1=4, q1=4, p2=4, q2=4)
    checks.append(_check("holder-leibniz-gamma0", hol_kp, 1.0 + 1e-10, "<="))

    cases = [
        ("kato-ponce", dict(gamma=0.5, r=2, p1=4, q1=4, p2=4, q2=4), True),
        ("chain-rule", dict(gamma=0.5, nu=2.0, r=2, p=4, q=4, analytic=True), False),
        ("power-estimate", dict(gamma=0.5, nu=3.0, r=2, p=6, q=6), False),
        ("power-difference", dict(gamma=0.5, nu=3.0, r=2, p=6, q=6), True),
    ]
    for kind, kw, needs_pair in cases:
        coarse = _max_ratio(kind, coarse_fields,
                            coarse_pairs if needs_pair else None, **kw)
        refined = _max_ratio(kind, fine_fields,
                             fine_pairs if needs_pair else None, **kw)
        change = abs(refined - coarse) / coarse
        checks.append(_check(f"refinement-stability-{kind}", change, 0.25))
        rows.append([kind, coarse, refined, change])

    # hypothesis guards
    guards = [
        ("power-estimate", dict(gamma=2.5, nu=2.2, r=2, p=6, q=6)),   # ceil > nu
        ("power-difference", dict(gamma=1.5, nu=2.2, r=2, p=6, q=6)),  # ceil > nu-1
        ("kato-ponce", dict(gamma=0.5, r=2, p1=3, q1=4, p2=4, q2=4)),  # relation
        ("chain-rule", dict(gamma=1.5, nu=2.0, r=2, p=4, q=4)),        # gamma range
    ]
    rejected = 0
    for kind, kw in guards:
        try:
            diagnostics.inequality_sample(kind, kw, [coarse_fields[0],
                                                     coarse_fields[1]])
        except HypothesisError:
            rejected += 1
    checks.append(_check("guards-reject", rejected, len(guards) - 0.5, ">"))
    tables = {"ratios": {"columns": ["kind", "max_ratio_coarse",
                                     "max_ratio_fine", "relative_change"],
                         "rows": rows}}
    return _verdict("inequalities", checks, tables)


# ---------------------------------------------------------------------------
# scattering monitor
# ---------------------------------------------------------------------------

def suite_scattering(config=None):
    """Free-flow Cauchy increments vanish to 1e-12; the small-data cubic
    run's late increments are smaller than its early ones (soft check).
    With an explicit NLFS `config`, that run is monitored instead of the
    reference small-data one."""
    checks = []
    rows = []
    lin = (dataclasses.replace(config, linear_mode=True) if config is not None
           else reference_nlfs_config(sigma=1.5, t_final=1.0, dt=1e-2,
                                      linear_mode=True, snapshot_stride=10))
    traj = evolution.integrate_nlfs(lin)
    gamma = float(lin.params.sigma) / 2
    incs = diagnostics.scattering_monitor(traj, lin.params, gamma)
    worst = max(e["increment"] for e in incs)
    norm0 = sobolev_norm(traj.states[0], gamma, 2)
    checks.append(_check("free-flow-increments", worst / norm0, 1e-12))
    for e in incs:
        rows.append(["linear", e["t0"], e["t1"], e["increment"]])

    small = (config if config is not None
             else reference_nlfs_config(sigma=1.5, amplitude=0.05, t_final=2.0,
                                        dt=2e-3, snapshot_stride=100))
    straj = evolution.integrate_nlfs(small)
    sincs = diagnostics.scattering_monitor(straj, small.params, gamma)
    half = len(sincs) // 2
    early = sum(e["increment"] for e in sincs[:half])
    late = sum(e["increment"] for e in sincs[half:])
    checks.append(_check("late-increments-smaller", late, early, "<", soft=True,
                         note="qualitative on the torus; reported, not asserted"))
    for e in sincs:
        rows.append(["cubic-small", e["t0"], e["t1"], e["increment"]])
    tables = {"increments": {"columns": ["case", "t0", "t1", "increment"],
                             "rows": rows}}
    return _verdict("scattering", checks, tables)


def run_suite(name: str, **kw):
    runners = {"conservation": suite_conservation,
               "scaling": suite_scaling,
               "dispersive": suite_dispersive,
               "inequalities": suite_inequalities,
               "scattering": suite_scattering}
    if name not in runners:
        raise KeyError(f"unknown suite {name!r}; choose from {SUITES}")
    return runners[name](**kw)


# ---------------------------------------------------------------------------
# shared helpers for tests and the acceptance battery
# ---------------------------------------------------------------------------

def lp_structure_summary(n=256, box=8 * math.pi, seed=42):
    """Partition resummation, almost-orthogonality bracket, Bdot0_2 vs L^2,
    and cutoff-independence measurements on one mean-free random field."""
    grid = GridSpec(1, n, box).build()
    u = profiles.random_field(grid, seed, alpha=1.0, mean_free=True)
    parts = project_all(u, homogeneous=False)
    resum = sum(p.values for p in parts.values())
    resum_err = float(np.abs(resum - u.values).max()
                      / np.abs(u.values).max())
    hom = project_all(u, homogeneous=True)
    l2sq = lebesgue_norm(u, 2) ** 2
    ortho = sum(lebesgue_norm(p, 2) ** 2 for p in hom.values()) / l2sq
    b0 = besov_norm(u, 0.0, 2, homogeneous=True)
    ratio_b0 = b0 / lebesgue_norm(u, 2)
    alt = besov_norm(u, 0.75, 2, homogeneous=True, cutoff=ALT_CUTOFF)
    std = besov_norm(u, 0.75, 2, homogeneous=True, cutoff=STANDARD_CUTOFF)
    return {"resummation_error": resum_err,
            "almost_orthogonality": float(ortho),
            "besov0_over_l2": float(ratio_b0),
            "cutoff_ratio": float(alt / std),
            "leakage": coverage_leakage(u)}
