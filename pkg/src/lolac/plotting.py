"""Figures for the CLI's `--figures DIR` option.

Each figure is written next to a CSV file with the numbers it shows.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def plot_layers(report, outdir, stem: str = "layers") -> list[Path]:
    """Dependency graph laid out by evaluation layer; edges labelled with offsets."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    columns: dict = {}
    for name in report.graph.nodes:
        columns.setdefault(report.layer.get(name, 0), []).append(name)
    pos = {}
    for layer, names in columns.items():
        for i, name in enumerate(names):
            pos[name] = (layer, -i)
    height = max((len(v) for v in columns.values()), default=1)
    fig, ax = plt.subplots(figsize=(2.4 * max(len(columns), 1) + 1, 0.7 * height + 1.5))
    for e in report.sync_edges:
        (x0, y0), (x1, y1) = pos[e.accessor], pos[e.accessed]
        if e.accessor == e.accessed:
            ax.annotate("", xy=(x0 + 0.08, y0 + 0.12), xytext=(x0 - 0.08, y0 + 0.12),
                        arrowprops=dict(arrowstyle="->", connectionstyle="arc3,rad=-1.6", color="tab:gray"))
            ax.text(x0, y0 + 0.32, f"{e.offset:+d}", ha="center", fontsize=7, color="tab:gray")
            continue
        color = "tab:red" if e.distance == 0 else "tab:gray"
        ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                    arrowprops=dict(arrowstyle="->", color=color, shrinkA=14, shrinkB=14, connectionstyle="arc3,rad=0.15"))
        ax.text((x0 + x1) / 2, (y0 + y1) / 2 + 0.08, f"{e.offset:+d}/d={e.distance}", fontsize=6, color=color, ha="center")
    for name, (x, y) in pos.items():
        kind = report.graph.kinds[name]
        face = {"input": "#dde8f5", "output": "#f3f3f3", "trigger": "#fbe3d6"}[kind]
        ax.text(x, y, f"{name}\nshift {report.shift[name]}", ha="center", va="center", fontsize=7,
                bbox=dict(boxstyle="round", facecolor=face, edgecolor="black", linewidth=0.6))
    ax.set_xticks(sorted(columns))
    ax.set_xticklabels(["inputs" if l == 0 else f"layer {l}" for l in sorted(columns)])
    ax.set_yticks([])
    ax.set_xlim(-0.7, max(columns, default=0) + 0.7)
    ax.set_ylim(-height + 0.3, 0.8)
    for side in ("top", "right", "left"):
        ax.spines[side].set_visible(False)
    ax.set_title(f"evaluation layers (preflen={report.preflen}, postlen={report.postlen})", fontsize=9)
    fig.tight_layout()
    png = outdir / f"{stem}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    table = outdir / f"{stem}.csv"
    _write_csv(
        table,
        ["stream", "kind", "layer", "shift", "memreq", "slots"],
        [
            (n, report.graph.kinds[n], report.layer.get(n, 0), report.shift[n], report.memreq[n], report.slots[n])
            for n in report.graph.nodes
        ],
    )
    return [png, table]


def plot_bench(results, outdir, stem: str = "bench") -> list[Path]:
    """Grouped bars of ns/event, log scale, one group per specification."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(1.8 * len(results) + 2, 3.2))
    xs = range(len(results))
    ax.bar([x - 0.2 for x in xs], [r.interpreter_ns for r in results], 0.4, label="interpreter")
    ax.bar([x + 0.2 for x in xs], [r.monitor_ns for r in results], 0.4, label="monitor")
    for x, r in zip(xs, results):
        ax.text(x, max(r.interpreter_ns, r.monitor_ns) * 1.3, f"{r.ratio:.0f}x", ha="center", fontsize=8)
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r.spec_name for r in results])
    ax.set_yscale("log")
    ax.set_ylabel("ns / event (median)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    png = outdir / f"{stem}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    table = outdir / f"{stem}.csv"
    _write_csv(
        table,
        ["spec", "events", "interpreter_ns_per_event", "monitor_ns_per_event", "ratio"],
        [(r.spec_name, r.events, f"{r.interpreter_ns:.3f}", f"{r.monitor_ns:.3f}", f"{r.ratio:.3f}") for r in results],
    )
    return [png, table]


def plot_difftest(report, outdir, stem: str = "difftest") -> list[Path]:
    """Stacked verdict counts per monitor variant, and trace lengths tested."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    verdicts = ["match", "runtime_fault", "mismatch", "build_failure"]
    counts = {v: {k: 0 for k in verdicts} for v in report.variants}
    for c in report.cases:
        counts[c.variant][c.verdict] += 1
    fig, (ax, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    bottom = [0] * len(report.variants)
    colors = {"match": "tab:green", "runtime_fault": "tab:olive", "mismatch": "tab:red", "build_failure": "tab:purple"}
    for k in verdicts:
        vals = [counts[v][k] for v in report.variants]
        ax.bar(report.variants, vals, bottom=bottom, label=k, color=colors[k])
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.set_ylabel("cases")
    ax.set_title(f"difftest {report.spec_name}", fontsize=9)
    ax.legend(fontsize=7)
    lengths = [c.length for c in report.cases if c.variant == report.variants[0]]
    ax2.hist(lengths, bins=min(30, max(lengths, default=0) + 1) or 1, color="tab:blue")
    ax2.axvline(report.preflen, color="black", linestyle=":", linewidth=1)
    ax2.set_xlabel("trace length (dotted: preflen)")
    ax2.set_ylabel("traces")
    fig.tight_layout()
    png = outdir / f"{stem}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    table = outdir / f"{stem}.csv"
    _write_csv(table, ["variant"] + verdicts, [[v] + [counts[v][k] for k in verdicts] for v in report.variants])
    return [png, table]
