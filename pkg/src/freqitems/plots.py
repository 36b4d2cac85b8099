"""Optional PNG rendering of benchmark tables.

Everything here consumes the same BenchReport rows the CSV writer sees,
so the figures never disagree with the delimited output.  Rendering is
opt-in from the command line; headless environments are fine because the
Agg backend is forced before pyplot loads.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bench import BenchReport


def _mean_rows(rows: Sequence[BenchReport]) -> List[BenchReport]:
    means = [r for r in rows if r.repeat == "mean"]
    # single-repeat runs have no mean row; every row is its own summary
    return means if means else list(rows)


def render_compare(rows: Sequence[BenchReport], outdir: Path) -> List[Path]:
    """Bar panels of mean update rate and mean max error per algorithm."""
    means = _mean_rows(rows)
    labels = [f"{r.algo}\nk={r.k}" for r in means]
    fig, (ax_time, ax_err) = plt.subplots(1, 2, figsize=(10, 4))
    ax_time.bar(labels, [r.updates_per_s for r in means], color="#4878a8")
    ax_time.set_ylabel("updates / s")
    ax_time.set_title("throughput (higher is better)")
    ax_err.bar(labels, [r.max_err for r in means], color="#a85448")
    ax_err.set_ylabel("max lower-bound error (weight)")
    ax_err.set_title("max error (lower is better)")
    for ax in (ax_time, ax_err):
        ax.tick_params(axis="x", labelsize=8)
    fig.tight_layout()
    path = Path(outdir) / "compare.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def render_sweep(rows: Sequence[BenchReport], outdir: Path) -> List[Path]:
    """Time and error as functions of the decrement quantile, per k."""
    means = _mean_rows(rows)
    ks = sorted({r.k for r in means})
    fig, (ax_time, ax_err) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    for k in ks:
        series = sorted((r for r in means if r.k == k), key=lambda r: r.q)
        qs = [r.q for r in series]
        ax_time.plot(qs, [r.time_s for r in series], marker="o", label=f"k={k}")
        ax_err.plot(qs, [r.max_err for r in series], marker="o", label=f"k={k}")
    ax_time.set_ylabel("time (s)")
    ax_time.legend()
    ax_err.set_ylabel("max lower-bound error (weight)")
    ax_err.set_xlabel("decrement quantile q")
    fig.tight_layout()
    path = Path(outdir) / "quantile_sweep.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def render_merge(rows: Sequence[BenchReport], outdir: Path) -> List[Path]:
    """Total merge time and mean post-merge error per method."""
    methods = []
    for r in rows:
        if r.algo not in methods:
            methods.append(r.algo)
    totals = {m: sum(r.time_s for r in rows
                     if r.algo == m and r.repeat != "mean") for m in methods}
    errs = {m: [r.max_err for r in rows
                if r.algo == m and r.repeat != "mean"] for m in methods}
    fig, (ax_time, ax_err) = plt.subplots(1, 2, figsize=(10, 4))
    ax_time.bar(methods, [totals[m] for m in methods], color="#4878a8")
    ax_time.set_ylabel("total merge time (s)")
    ax_time.set_title("merge cost across all pairs")
    ax_err.bar(methods, [sum(e) / len(e) for e in
                         (errs[m] for m in methods)], color="#a85448")
    ax_err.set_ylabel("mean post-merge max error")
    ax_err.set_title("merged summary error")
    fig.tight_layout()
    path = Path(outdir) / "merge_bench.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]
