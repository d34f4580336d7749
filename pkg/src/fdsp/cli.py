"""Command-line entry point.

Subcommands: exponents, norms, run, verify, sweep, report.
Exit codes: 0 success, 1 check failed, 2 configuration error, 3 runtime abort.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .config import ConfigError
from .exponents import (THEOREM_IDS, EquationKind, EquationParams,
                        HypothesisError, audit_all, audit_theorem)
from .lpnorms import NormSpec, spacetime_norm
from .runner import run_scenario, run_sweep
from .spectral import read_snapshot

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _fraction(text):
    s = text.strip().lower()
    if s.endswith("pi"):
        return Fraction(s[:-2] or "1") * Fraction(math.pi).limit_denominator(10 ** 15)
    return Fraction(s)


def cmd_exponents(args) -> int:
    try:
        params = EquationParams(args.d, _fraction(args.sigma),
                                _fraction(args.nu), args.mu,
                                EquationKind(args.kind))
        gamma = None if args.gamma is None else _fraction(args.gamma)
        if args.theorem == "all":
            report = audit_all(params, gamma)
        else:
            report = audit_theorem(params, gamma, args.theorem)
    except (ValueError, KeyError, HypothesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(report.format_table())
    payload = json.dumps(report.to_dict(), indent=2)
    if args.json:
        Path(args.json).write_text(payload + "\n")
    else:
        print(payload)
    if all(a.passed for a in report.audits):
        return EXIT_OK
    return EXIT_CHECK_FAILED


def cmd_norms(args) -> int:
    try:
        spec = NormSpec(args.space, args.gamma, math.inf if args.q == "inf"
                        else float(args.q), remove_mean=True)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.snapshot:
        field = read_snapshot(args.snapshot)
        print(repr(spec.evaluate(field)))
        return EXIT_OK
    if args.trajectory:
        run_dir = Path(args.trajectory)
        manifest_path = run_dir / "manifest.json"
        if not manifest_path.exists():
            print(f"error: no manifest.json under {run_dir}", file=sys.stderr)
            return EXIT_CONFIG
        manifest = json.loads(manifest_path.read_text())
        snaps = []
        for entry in manifest["snapshots"]:
            path = entry.get("path") or entry.get("position")
            snaps.append((entry["t"], read_snapshot(run_dir / path)))
        lines = ["time,value"]
        values = [(t, spec.evaluate(f)) for t, f in snaps]
        for t, v in values:
            lines.append(f"{t!r},{v!r}")
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            print(text, end="")
        if args.p is not None:
            p = math.inf if args.p == "inf" else float(args.p)
            total = spacetime_norm(snaps, p, spec.evaluate)
            print(f"# L^{args.p}-in-time composite: {total!r}")
        return EXIT_OK
    print("error: need --snapshot or --trajectory", file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args) -> int:
    try:
        manifest = run_scenario(args.config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # integrator aborts carry partial outputs
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"status: {manifest.status}")
    if manifest.status != "completed":
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_verify(args) -> int:
    from .config import load_config
    from .report import write_tables
    from .suites import run_suite

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kw = {}
    if args.config:
        try:
            run, _ = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if args.suite in ("conservation", "scaling", "scattering"):
            kw["config"] = run
        else:
            print(f"note: suite {args.suite} runs its built-in battery; "
                  "--config ignored", file=sys.stderr)
    try:
        verdict = run_suite(args.suite, **kw)
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    verdict_path = out / f"{args.suite}_verdict.json"
    verdict_path.write_text(json.dumps(verdict, indent=2) + "\n")
    write_tables(verdict, out)
    for check in verdict["checks"]:
        status = "pass" if check["passed"] else "FAIL"
        print(f"[{status}] {check['id']}: measured {check['measured']:.6g} "
              f"{check['comparator']} {check['tolerance']}")
    print(f"suite {args.suite}: {'PASS' if verdict['passed'] else 'FAIL'} "
          f"(verdict: {verdict_path})")
    return EXIT_OK if verdict["passed"] else EXIT_CHECK_FAILED


def cmd_sweep(args) -> int:
    try:
        index = run_sweep(args.sweep, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    bad = [p for p in index["points"] if p["status"] not in ("completed",)]
    print(f"sweep: {len(index['points'])} points, {len(bad)} not completed")
    if index.get("convergence"):
        print(f"dt convergence error ratios: "
              f"{index['convergence']['error_ratios']}")
    return EXIT_OK if not bad else EXIT_RUNTIME


def cmd_report(args) -> int:
    from .report import render_report

    try:
        written = render_report(args.inputs, args.out, figures=not args.no_figures)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdsp",
        description="Spectral simulation and verification lab for fractional "
                    "NLS and fractional wave equations on periodic domains.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="critical exponents, admissible "
                       "pairs, and theorem hypothesis audits")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--mu", type=int, default=1, choices=(1, -1))
    p.add_argument("--gamma", default=None)
    p.add_argument("--kind", default="nlfs", choices=("nlfs", "nlfw"))
    p.add_argument("--theorem", default="all",
                   choices=("all",) + THEOREM_IDS)
    p.add_argument("--json", default=None, metavar="PATH",
                   help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("norms", help="evaluate a norm on a snapshot or a "
                       "whole trajectory (emits CSV)")
    p.add_argument("--snapshot", default=None)
    p.add_argument("--trajectory", default=None, metavar="RUN_DIR")
    p.add_argument("--space", default="lebesgue",
                   choices=("lebesgue", "sobolev", "sobolev-hom", "besov",
                            "besov-hom"))
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--q", default="2")
    p.add_argument("--p", default=None, help="optional L^p-in-time exponent")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("run", help="run one configuration file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--suite", required=True,
                   choices=("conservation", "scaling", "dispersive",
                            "inequalities", "scattering"))
    p.add_argument("--config", default=None,
                   help="run the suite's checks on this configuration "
                        "(conservation/scaling/scattering); others use "
                        "their built-in battery")
    p.add_argument("--out", default="verify-out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("--sweep", required=True)
    p.add_argument("--out", default="sweep-out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render verdicts / run dirs into "
                       "markdown and figures")
    p.add_argument("inputs", nargs="+",
                   help="verdict JSON files or run directories")
    p.add_argument("--out", default="report-out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
