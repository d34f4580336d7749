"""Run-configuration files: flat INI with typed sections [equation], [grid],
[initial], [initial_velocity], [method], [output].

Any key can be overridden from the environment as FDSP_<SECTION>__<KEY>
(upper-case, double underscore between section and key). Numeric values
accept a trailing "pi" multiplier (box_length = 8pi).
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass
from fractions import Fraction

from .evolution import GridSpec, InitialSpec, PicardSpec, RunConfig
from .exponents import EquationKind, EquationParams
from .lpnorms import NormSpec

ENV_PREFIX = "FDSP_"


class ConfigError(ValueError):
    """Configuration problem; the message names the offending key."""


@dataclass(frozen=True)
class OutputSpec:
    directory: str = ""
    save_snapshots: bool = True


def _parse_number(text: str, key: str) -> float:
    s = text.strip().lower().replace(" ", "")
    factor = 1.0
    if s.endswith("pi"):
        factor = math.pi
        s = s[:-2] or "1"
        if s in ("", "+", "-"):
            s += "1"
        s = s.rstrip("*")
    try:
        return float(Fraction(s)) * factor if "/" in s else float(s) * factor
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: cannot parse number {text!r}") from None


def _parse_bool(text: str, key: str) -> bool:
    s = text.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: cannot parse boolean {text!r}")


def _parse_tuple(text: str, key: str):
    items = [t for t in text.replace(",", " ").split() if t]
    return tuple(_parse_number(t, key) for t in items)


def parse_norm_specs(text: str, key: str = "output.norms"):
    """Comma list of space:gamma:q entries, e.g. 'sobolev:1:2, lebesgue:0:inf'."""
    specs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{key}: norm entry {chunk!r} is not space:gamma:q")
        space = parts[0].strip()
        gamma = _parse_number(parts[1], key)
        q = math.inf if parts[2].strip().lower() == "inf" else _parse_number(parts[2], key)
        try:
            specs.append(NormSpec(space, gamma, q, remove_mean=True))
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    return tuple(specs)


class _Section:
    def __init__(self, parser, name, environ):
        self.name = name
        self.environ = environ
        self.raw = dict(parser[name]) if parser.has_section(name) else {}

    def _lookup(self, key):
        env_key = f"{ENV_PREFIX}{self.name.upper()}__{key.upper()}"
        if env_key in self.environ:
            return self.environ[env_key]
        return self.raw.get(key)

    def get(self, key, default=None):
        value = self._lookup(key)
        return default if value is None or value == "" else value

    def number(self, key, default=None):
        value = self._lookup(key)
        if value is None or value == "":
            if default is None:
                raise ConfigError(f"{self.name}.{key}: required key missing")
            return default
        return _parse_number(value, f"{self.name}.{key}")

    def integer(self, key, default=None):
        value = self.number(key, default)
        if value != int(value):
            raise ConfigError(f"{self.name}.{key}: expected an integer, got {value}")
        return int(value)

    def boolean(self, key, default=False):
        value = self._lookup(key)
        if value is None or value == "":
            return default
        return _parse_bool(value, f"{self.name}.{key}")

    def exists(self):
        return bool(self.raw)


_KNOWN_SECTIONS = ("equation", "grid", "initial", "initial_velocity",
                   "method", "output")


def _initial_spec(sec: _Section, key_prefix: str) -> InitialSpec:
    profile = sec.get("profile", "gaussian")
    known = ("gaussian", "plane-wave", "bump", "random", "file", "zero")
    if profile not in known:
        raise ConfigError(f"{key_prefix}.profile: unknown profile {profile!r}; "
                          f"choose from {known}")
    center = sec.get("center")
    velocity = sec.get("velocity")
    mode = sec.get("mode")
    return InitialSpec(
        profile=profile,
        amplitude=sec.number("amplitude", 1.0),
        width=sec.number("width", 1.0),
        center=None if center is None else _parse_tuple(center, f"{key_prefix}.center"),
        velocity=None if velocity is None else _parse_tuple(velocity,
                                                            f"{key_prefix}.velocity"),
        mode=(1,) if mode is None else tuple(
            int(v) for v in _parse_tuple(mode, f"{key_prefix}.mode")),
        seed=sec.integer("seed", 0),
        alpha=sec.number("alpha", 0.0),
        modes_cap=(None if sec.get("modes_cap") is None
                   else sec.integer("modes_cap")),
        path=sec.get("path"),
    )


def load_config(path, environ=None):
    """Parse a run configuration file. Returns (RunConfig, OutputSpec)."""
    environ = os.environ if environ is None else environ
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for section in parser.sections():
        if section not in _KNOWN_SECTIONS:
            raise ConfigError(f"unknown section [{section}]")

    eq = _Section(parser, "equation", environ)
    kind_text = str(eq.get("kind", "nlfs")).strip().lower()
    try:
        kind = EquationKind(kind_text)
    except ValueError:
        raise ConfigError(f"equation.kind: unknown kind {kind_text!r}") from None
    mu = eq.integer("mu", 1)
    try:
        params = EquationParams(eq.integer("d", 1),
                                Fraction(eq.number("sigma")).limit_denominator(10 ** 12),
                                Fraction(eq.number("nu")).limit_denominator(10 ** 12),
                                mu, kind)
    except ValueError as exc:
        raise ConfigError(f"equation: {exc}") from None

    gr = _Section(parser, "grid", environ)
    grid = GridSpec(gr.integer("d", params.d), gr.integer("n", 256),
                    gr.number("box_length", 2 * math.pi))
    if grid.d != params.d:
        raise ConfigError("grid.d: grid dimension differs from equation.d")

    init = _initial_spec(_Section(parser, "initial", environ), "initial")
    vel_sec = _Section(parser, "initial_velocity", environ)
    init_vel = _initial_spec(vel_sec, "initial_velocity") if vel_sec.exists() else None

    me = _Section(parser, "method", environ)
    method = str(me.get("name", "split-step")).strip()
    out = _Section(parser, "output", environ)
    norms_text = out.get("norms", "")
    gamma_raw = out.get("gamma_monitor")

    try:
        run = RunConfig(
            params=params,
            grid=grid,
            initial=init,
            initial_velocity=init_vel,
            dt=me.number("dt", 1e-3),
            t_final=me.number("t_final", 1.0),
            method=method,
            snapshot_stride=me.integer("snapshot_stride", 10),
            linear_mode=me.boolean("linear_mode", False),
            dealias=str(me.get("dealias", "auto")).strip(),
            norms=parse_norm_specs(norms_text) if norms_text else (),
            gamma_monitor=None if gamma_raw is None else out.number("gamma_monitor"),
            ceiling_factor=out.number("ceiling_factor", 1e6),
            picard=PicardSpec(me.integer("picard_max_iters", 30),
                              me.number("picard_tolerance", 1e-10),
                              me.integer("picard_nodes_per_step", 1)),
            smallness_eps=(None if me.get("smallness_eps") is None
                           else me.number("smallness_eps")),
            strict=out.boolean("strict", False),
            label=str(out.get("label", "run")),
        )
    except ValueError as exc:
        raise ConfigError(f"method: {exc}") from None

    output = OutputSpec(directory=str(out.get("directory", "")),
                        save_snapshots=out.boolean("save_snapshots", True))
    return run, output


def resolved_config_text(run: RunConfig, output: OutputSpec) -> str:
    """Canonical text echo of a fully resolved configuration (defaults
    expanded); hashed into the run manifest."""
    lines = ["[equation]",
             f"kind = {run.params.kind.value}",
             f"d = {run.params.d}",
             f"sigma = {run.params.sigma}",
             f"nu = {run.params.nu}",
             f"mu = {run.params.mu}",
             "[grid]",
             f"d = {run.grid.d}",
             f"n = {run.grid.n}",
             f"box_length = {run.grid.box_length!r}"]

    def initial_lines(tag, spec):
        if spec is None:
            return []
        out = [f"[{tag}]", f"profile = {spec.profile}"]
        if spec.field_value is not None:
            out.append("field_value = <in-memory>")
            return out
        out += [f"amplitude = {spec.amplitude!r}", f"width = {spec.width!r}",
                f"center = {spec.center}", f"velocity = {spec.velocity}",
                f"mode = {spec.mode}", f"seed = {spec.seed}",
                f"alpha = {spec.alpha!r}", f"modes_cap = {spec.modes_cap}",
                f"path = {spec.path}"]
        return out

    lines += initial_lines("initial", run.initial)
    lines += initial_lines("initial_velocity", run.initial_velocity)
    lines += ["[method]",
              f"name = {run.method}",
              f"dt = {run.dt!r}",
              f"t_final = {run.t_final!r}",
              f"snapshot_stride = {run.snapshot_stride}",
              f"linear_mode = {run.linear_mode}",
              f"dealias = {run.dealias}",
              f"picard_max_iters = {run.picard.max_iters}",
              f"picard_tolerance = {run.picard.tolerance!r}",
              f"picard_nodes_per_step = {run.picard.nodes_per_step}",
              f"smallness_eps = {run.smallness_eps}",
              "[output]",
              f"directory = {output.directory}",
              f"save_snapshots = {output.save_snapshots}",
              f"norms = {','.join(s.label() for s in run.norms)}",
              f"gamma_monitor = {run.gamma_monitor}",
              f"ceiling_factor = {run.ceiling_factor!r}",
              f"strict = {run.strict}",
              f"label = {run.label}"]
    return "\n".join(lines) + "\n"
