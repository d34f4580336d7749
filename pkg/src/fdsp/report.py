"""Render verdict documents and run diagnostics into a markdown summary and
matplotlib figures written next to the delimited output."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.4g}"
    if isinstance(value, list):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def verdict_markdown(verdicts) -> str:
    lines = ["# Verification report", ""]
    for verdict in verdicts:
        status = "PASS" if verdict["passed"] else "FAIL"
        lines.append(f"## Suite `{verdict['suite']}` -- {status}")
        lines.append("")
        lines.append("| check | measured | comparator | tolerance | status |")
        lines.append("|---|---|---|---|---|")
        for c in verdict["checks"]:
            mark = "pass" if c["passed"] else "**FAIL**"
            if c.get("soft"):
                mark += " (soft)"
            lines.append(f"| {c['id']} | {_fmt(c['measured'])} | "
                         f"{c['comparator']} | {_fmt(c['tolerance'])} | {mark} |")
        lines.append("")
    return "\n".join(lines)


def write_tables(verdict, out_dir: Path):
    paths = []
    for name, table in verdict.get("tables", {}).items():
        path = out_dir / f"{verdict['suite']}_{name}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table["columns"])
            for row in table["rows"]:
                writer.writerow([repr(v) if isinstance(v, float) else v
                                 for v in row])
        paths.append(path)
    return paths


def figure_for_suite(verdict, out_dir: Path):
    """One figure per suite where the detail table plots naturally."""
    suite = verdict["suite"]
    tables = verdict.get("tables", {})
    path = out_dir / f"{suite}.png"
    if suite == "dispersive" and "decay" in tables:
        table = tables["decay"]
        cols = table["columns"]
        fig, ax = plt.subplots(figsize=(6, 4))
        groups = {}
        for row in table["rows"]:
            groups.setdefault((row[cols.index("d")], row[cols.index("sigma")]),
                              []).append(row)
        for (d, sigma), rows in sorted(groups.items()):
            ts = [r[cols.index("t")] for r in rows]
            sups = [r[cols.index("sup_norm")] for r in rows]
            sups = [s / sups[0] for s in sups]
            ax.loglog([1 + t for t in ts], sups, "o-",
                      label=f"d={d}, sigma={sigma} (fit {rows[0][cols.index('fitted')]:.2f})")
            ref = [(1 + ts[0]) / (1 + t) for t in ts]
            ax.loglog([1 + t for t in ts], [r ** (d / 2.0) for r in ref], "k--",
                      alpha=0.4)
        ax.set_xlabel("1 + t")
        ax.set_ylabel("sup norm (normalized)")
        ax.set_title("Free-flow dispersive decay")
        ax.legend(fontsize=8)
    elif suite == "conservation" and "drift" in tables:
        table = tables["drift"]
        cols = table["columns"]
        fig, ax = plt.subplots(figsize=(6, 4))
        groups = {}
        for row in table["rows"]:
            groups.setdefault((row[cols.index("flow")], row[cols.index("sigma")]),
                              []).append(row)
        for (flow, sigma), rows in sorted(groups.items()):
            ts = [r[cols.index("t")] for r in rows]
            es = [abs(r[cols.index("energy_drift")]) + 1e-20 for r in rows]
            ax.semilogy(ts, es, label=f"{flow} sigma={sigma}")
        ax.set_xlabel("t")
        ax.set_ylabel("|relative energy drift|")
        ax.set_title("Conservation drift")
        ax.legend(fontsize=7)
    elif suite == "inequalities" and "ratios" in tables:
        table = tables["ratios"]
        cols = table["columns"]
        fig, ax = plt.subplots(figsize=(6, 4))
        kinds = [r[cols.index("kind")] for r in table["rows"]]
        coarse = [r[cols.index("max_ratio_coarse")] for r in table["rows"]]
        fine = [r[cols.index("max_ratio_fine")] for r in table["rows"]]
        xs = range(len(kinds))
        ax.bar([x - 0.2 for x in xs], coarse, width=0.4, label="n")
        ax.bar([x + 0.2 for x in xs], fine, width=0.4, label="2n")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(kinds, rotation=20, fontsize=8)
        ax.set_ylabel("max ratio")
        ax.set_title("Inequality ratio stability under refinement")
        ax.legend()
    elif suite == "scattering" and "increments" in tables:
        table = tables["increments"]
        cols = table["columns"]
        fig, ax = plt.subplots(figsize=(6, 4))
        groups = {}
        for row in table["rows"]:
            groups.setdefault(row[cols.index("case")], []).append(row)
        for case, rows in sorted(groups.items()):
            ts = [r[cols.index("t1")] for r in rows]
            vals = [r[cols.index("increment")] + 1e-20 for r in rows]
            ax.semilogy(ts, vals, "o-", label=case)
        ax.set_xlabel("t")
        ax.set_ylabel("Cauchy increment")
        ax.set_title("Back-propagated state increments")
        ax.legend(fontsize=8)
    elif suite == "scaling" and "scaling" in tables:
        table = tables["scaling"]
        cols = table["columns"]
        fig, ax = plt.subplots(figsize=(6, 4))
        cases = [r[cols.index("case")] for r in table["rows"]]
        vals = [r[cols.index("value")] + 1e-20 for r in table["rows"]]
        ax.barh(range(len(cases)), vals, log=True)
        ax.set_yticks(range(len(cases)))
        ax.set_yticklabels(cases, fontsize=7)
        ax.set_xlabel("deviation")
        ax.set_title("Scaling covariance deviations")
    else:
        return None
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def run_figure(run_dir: Path, out_dir: Path):
    """Mass/energy drift curves from a run directory's diagnostics.csv."""
    csv_path = run_dir / "diagnostics.csv"
    if not csv_path.exists():
        return None
    with csv_path.open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return None
    ts = [float(r["t"]) for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for ax, col in zip(axes, ("mass", "energy")):
        if col not in rows[0] or rows[0][col] == "":
            continue
        vals = [float(r[col]) for r in rows]
        base = vals[0] if vals[0] != 0 else 1.0
        ax.semilogy(ts, [abs(v - vals[0]) / abs(base) + 1e-20 for v in vals])
        ax.set_xlabel("t")
        ax.set_ylabel(f"relative {col} drift")
    fig.tight_layout()
    path = out_dir / "run_drift.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_report(inputs, out_dir, figures=True):
    """Render verdict JSON files and/or run directories into summary.md and
    figures. Returns the list of written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    verdicts = []
    written = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            if figures:
                fig = run_figure(p, out_dir)
                if fig:
                    written.append(fig)
            manifest = p / "manifest.json"
            if manifest.exists():
                data = json.loads(manifest.read_text())
                verdicts.append({"suite": f"run:{p.name}",
                                 "passed": data["status"] == "completed",
                                 "checks": [{"id": "status",
                                             "measured": data["status"],
                                             "comparator": "==",
                                             "tolerance": "completed",
                                             "passed": data["status"] == "completed",
                                             "soft": False}],
                                 "tables": {}})
        else:
            verdict = json.loads(p.read_text())
            verdicts.append(verdict)
            if figures:
                fig = figure_for_suite(verdict, out_dir)
                if fig:
                    written.append(fig)
    md = out_dir / "summary.md"
    md.write_text(verdict_markdown(verdicts))
    written.append(md)
    return written
