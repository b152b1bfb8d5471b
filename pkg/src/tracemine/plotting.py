"""Figures for bench and mining reports (written to files, never shown)."""
from __future__ import annotations

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 120,
}


def _by_m(rows):
    groups = defaultdict(list)
    for r in rows:
        groups[r.m].append(r)
    for m in groups:
        groups[m].sort(key=lambda r: r.delta)
    return dict(sorted(groups.items()))


def plot_bench(rows, out_dir: str, stem: str = "bench") -> list[str]:
    """Two figures: trace totals vs delta, and sample count vs total traces."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    groups = _by_m(rows)
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.0, 2.8))
        for m, rs in groups.items():
            d = [r.delta for r in rs]
            ax1.plot(d, [max(r.total_traces, 1) for r in rs], "o-", label=f"total, m={m}")
            if all(r.distinct_traces is not None for r in rs):
                ax1.plot(d, [max(r.distinct_traces, 1) for r in rs], "s--", label=f"distinct, m={m}")
            ax2.plot(d, [r.E for r in rs], "o-", label=f"m={m}")
        ax1.set_yscale("log")
        ax1.set_xlabel("delta (minutes)")
        ax1.set_ylabel("traces")
        ax1.legend(frameon=False)
        ax2.set_xlabel("delta (minutes)")
        ax2.set_ylabel("|E|")
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}_traces.png")
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)

        fig, ax = plt.subplots(figsize=(3.6, 2.8))
        xs = [r.total_traces for r in rows if r.total_traces]
        ax.scatter(xs, [r.samples for r in rows if r.total_traces], s=14, label="drawn")
        ax.scatter(xs, [r.expected_samples for r in rows if r.total_traces], s=14, marker="x", label="C/epsilon")
        ax.set_xscale("log")
        ax.set_xlabel("total traces |S_m|")
        ax.set_ylabel("# samples")
        ax.legend(frameon=False)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}_samples.png")
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths


def plot_report(report, dag, path: str, top: int = 20) -> str:
    """Horizontal bar chart of estimated relative frequencies."""
    entries = report.entries[:top]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 0.25 * max(len(entries), 4) + 1))
        names = [dag.format_trace(e.trace) for e in entries][::-1]
        ax.barh(names, [e.est_frequency for e in entries][::-1])
        eps = report.metadata.get("epsilon")
        if eps:
            ax.axvline(eps, color="k", lw=0.8, ls="--")
        ax.set_xlabel("estimated relative frequency")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
