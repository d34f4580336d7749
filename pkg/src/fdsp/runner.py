"""Run lifecycle: execute a configuration, persist diagnostics CSV and
snapshots, and write a manifest that accounts for every artifact byte.

All files are written atomically (write to .tmp, then rename). CSV content
is deterministic for a fixed configuration: floats are serialized with
repr(), no wall-clock data enters the tables (wall times live only in the
manifest).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config, resolved_config_text
from .evolution import RunConfig, integrate
from .exponents import EquationKind, audit_theorem
from .spectral import WaveState, write_snapshot

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    config_text: str
    tool_version: str
    content_hash: str
    started: str
    finished: str
    status: str
    artifacts: list = field(default_factory=list)   # {path, bytes}
    snapshots: list = field(default_factory=list)   # {t, path} or {t, position, velocity}
    audit: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {"config": self.config_text,
                "tool_version": self.tool_version,
                "content_hash": self.content_hash,
                "started": self.started,
                "finished": self.finished,
                "status": self.status,
                "artifacts": self.artifacts,
                "snapshots": self.snapshots,
                "audit": self.audit,
                "extras": self.extras}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def format_float(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def records_csv(records) -> str:
    """Deterministic CSV of per-step records: fixed leading columns, any
    extra keys in sorted order."""
    lead = ["t", "mass", "energy", "monitor_norm", "high_band_fraction"]
    extras = sorted({k for r in records for k in r} - set(lead))
    columns = [c for c in lead if any(c in r for r in records)] + extras
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([format_float(rec.get(c, "")) for c in columns])
    return buf.getvalue()


def _regime_theorem(config: RunConfig) -> str:
    if config.params.kind is EquationKind.NLFW:
        return "lwp-subcrit-nlfw"
    if config.params.sigma >= 2:
        return "lwp-subcrit-nls-high-sigma"
    return "lwp-subcrit-nls-low-sigma"


def _default_audit_gamma(config: RunConfig) -> float:
    """A regularity inside the declared theorem's own gamma window when one
    exists (so the default audit asks "is this regime well-posed at all"),
    else sigma/2."""
    p = config.params
    d, sigma, nu = p.d, float(p.sigma), float(p.nu)
    if p.kind is EquationKind.NLFS and sigma >= 2:
        lo = max(0.0, d / 2.0 - sigma / (nu - 1.0))
    else:
        cap = max(nu - 1.0, 4.0 if d == 1 else 2.0)
        lo = max(0.0, d / 2.0 - sigma / cap)
    hi = d / 2.0
    if lo < hi:
        return (lo + hi) / 2.0
    return sigma / 2.0


def audit_config(config: RunConfig) -> dict:
    """Hypothesis audit for the declared regime; failures are warnings only
    (exploring ill-posed regimes is legitimate)."""
    gamma = config.gamma_monitor
    if gamma is None:
        gamma = _default_audit_gamma(config)
    theorem = _regime_theorem(config)
    report = audit_theorem(config.params, gamma, theorem)
    audit = report.audits[0]
    if not audit.passed:
        failed = [c.cid for c in audit.conditions if not c.passed]
        logger.warning("hypothesis audit %s failed conditions: %s",
                       theorem, ", ".join(failed))
    return report.to_dict()


def run_scenario(config_path, out_dir=None, environ=None) -> RunManifest:
    """Execute one configuration file and persist all artifacts.

    Returns the manifest (also written as manifest.json in the run
    directory). Integrator aborts keep their partial outputs and surface
    through the manifest status.
    """
    run, output = load_config(config_path, environ)
    out = Path(out_dir if out_dir is not None else (output.directory or "run-out"))
    out.mkdir(parents=True, exist_ok=True)

    started = _now()
    audit = audit_config(run)
    config_text = resolved_config_text(run, output)
    manifest = RunManifest(
        config_text=config_text,
        tool_version=__version__,
        content_hash=hashlib.sha256(config_text.encode()).hexdigest(),
        started=started,
        finished="",
        status="running",
        audit=audit,
    )

    traj = integrate(run)
    manifest.status = traj.status
    manifest.extras["high_band_alarm"] = traj.high_band_alarm
    if traj.status_time is not None:
        manifest.extras["status_time"] = traj.status_time
    if traj.picard_report is not None:
        manifest.extras["picard"] = traj.picard_report.to_dict()

    csv_path = out / "diagnostics.csv"
    atomic_write_text(csv_path, records_csv(traj.records))
    manifest.artifacts.append({"path": csv_path.name,
                               "bytes": csv_path.stat().st_size})

    if output.save_snapshots:
        for idx, (t, state) in enumerate(traj.snapshots()):
            if isinstance(state, WaveState):
                pos = out / f"snap_{idx:05d}_pos.fdsp"
                vel = out / f"snap_{idx:05d}_vel.fdsp"
                write_snapshot(pos, state.position)
                write_snapshot(vel, state.velocity)
                manifest.snapshots.append({"t": t, "position": pos.name,
                                           "velocity": vel.name})
                for p in (pos, vel):
                    manifest.artifacts.append({"path": p.name,
                                               "bytes": p.stat().st_size})
            else:
                p = out / f"snap_{idx:05d}.fdsp"
                write_snapshot(p, state)
                manifest.snapshots.append({"t": t, "path": p.name})
                manifest.artifacts.append({"path": p.name,
                                           "bytes": p.stat().st_size})

    manifest.finished = _now()
    atomic_write_text(out / "manifest.json",
                      json.dumps(manifest.to_dict(), indent=2) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepSpec:
    base: str
    axes: list                      # [(section.key, [text values])]
    cap: int = 256
    workers: int = 1

    def points(self):
        combos = [{}]
        for key, values in self.axes:
            combos = [dict(c, **{key: v}) for c in combos for v in values]
        return combos


def load_sweep(path) -> SweepSpec:
    import configparser

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not parser.read(path):
        raise ConfigError(f"sweep file not found: {path}")
    if not parser.has_section("sweep"):
        raise ConfigError("sweep file needs a [sweep] section with base=...")
    base = parser["sweep"].get("base", "")
    if not base:
        raise ConfigError("sweep.base: required key missing")
    base_path = Path(path).parent / base
    cap = int(parser["sweep"].get("cap", "256"))
    workers = int(parser["sweep"].get("workers", "1"))
    axes = []
    if parser.has_section("axes"):
        for key, text in parser["axes"].items():
            values = [v.strip() for v in text.split(",") if v.strip()]
            if "." not in key:
                raise ConfigError(f"axes.{key}: axis keys are section.key")
            axes.append((key, values))
    return SweepSpec(str(base_path), axes, cap, workers)


def _point_name(overrides) -> str:
    if not overrides:
        return "point_base"
    parts = [f"{k.split('.', 1)[1]}={v}" for k, v in overrides.items()]
    return "point_" + "_".join(p.replace("/", "-").replace(" ", "") for p in parts)


def run_sweep(sweep_path, out_dir) -> dict:
    """Run every point of a sweep; per-point failures are recorded and the
    sweep continues. Writes index.json aggregating statuses and, for a
    dt-halving axis, the observed convergence ratios."""
    spec = load_sweep(sweep_path)
    points = spec.points()
    if len(points) > spec.cap:
        raise ConfigError(
            f"sweep has {len(points)} points, exceeding the cap {spec.cap}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def run_point(overrides):
        name = _point_name(overrides)
        environ = dict(os.environ)
        for key, value in overrides.items():
            section, k = key.split(".", 1)
            environ[f"FDSP_{section.upper()}__{k.upper()}"] = value
        entry = {"point": name, "overrides": overrides}
        try:
            manifest = run_scenario(spec.base, out / name, environ)
            entry["status"] = manifest.status
            entry["high_band_alarm"] = manifest.extras.get("high_band_alarm", False)
        except Exception as exc:  # per-point failures never kill the sweep
            entry["status"] = "error"
            entry["error"] = str(exc)
        return entry

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            entries = list(pool.map(run_point, points))
    else:
        entries = [run_point(p) for p in points]

    index = {"sweep": str(sweep_path), "base": spec.base,
             "points": entries, "convergence": None}
    ratios = _dt_convergence(spec, entries, out)
    if ratios is not None:
        index["convergence"] = ratios
    atomic_write_text(out / "index.json", json.dumps(index, indent=2) + "\n")
    return index


def _dt_convergence(spec: SweepSpec, entries, out: Path):
    """For a pure method.dt axis with >= 3 values, Richardson-style error
    ratios ||u_dt - u_dt/2|| / ||u_dt/2 - u_dt/4|| from final snapshots."""
    import numpy as np

    from .spectral import read_snapshot

    dt_axes = [a for a in spec.axes if a[0] == "method.dt"]
    if len(dt_axes) != 1 or len(spec.axes) != 1 or len(dt_axes[0][1]) < 3:
        return None
    finals = []
    for entry in entries:
        if entry["status"] != "completed":
            return None
        mdir = out / entry["point"]
        manifest = json.loads((mdir / "manifest.json").read_text())
        snaps = manifest["snapshots"]
        if not snaps:
            return None
        last = snaps[-1]
        path = last.get("path") or last.get("position")
        finals.append(read_snapshot(mdir / path).values)
    ratios = []
    for a, b, c in zip(finals, finals[1:], finals[2:]):
        e1 = float(np.linalg.norm(a - b))
        e2 = float(np.linalg.norm(b - c))
        ratios.append(e1 / e2 if e2 > 0 else float("inf"))
    return {"axis": "method.dt", "values": dt_axes[0][1], "error_ratios": ratios}
