"""The five figure kinds.

Each renderer takes an input directory and an output path and returns the
output path.  Style is pinned for reproducibility: Agg backend, no
timestamps in SVG metadata, fixed hash salt for SVG element ids.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reading import (
    SchemaError,
    profile_files,
    read_criterion,
    read_interface,
    read_profile,
    read_sweep_summary,
    snapshot_files,
)

RC = {
    "svg.hashsalt": "plotkit",
    "svg.fonttype": "none",
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
}

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _save(fig, out_path):
    fig.savefig(out_path, metadata={"Date": None})
    plt.close(fig)
    return out_path


def _empty(ax, message: str):
    ax.annotate(
        f"no data: {message}",
        xy=(0.5, 0.5), xycoords="axes fraction",
        ha="center", va="center", color="#888888",
    )


def gallery(in_dir, out_path):
    """Initial-data gallery: one panel per profile CSV in the directory."""
    paths = profile_files(in_dir)
    with plt.rc_context(RC):
        if not paths:
            fig, ax = plt.subplots()
            _empty(ax, "no profile CSVs found")
            return _save(fig, out_path)
        ncols = min(len(paths), 3)
        nrows = (len(paths) + ncols - 1) // ncols
        fig, axes = plt.subplots(
            nrows, ncols, figsize=(4.0 * ncols, 2.8 * nrows), squeeze=False
        )
        for ax in axes.flat:
            ax.set_axis_off()
        for idx, path in enumerate(paths):
            prof = read_profile(path)
            ax = axes.flat[idx]
            ax.set_axis_on()
            if prof["x"].size == 0:
                _empty(ax, "empty profile")
            else:
                ax.plot(prof["x"], prof["u"], color=PALETTE[0])
                ax.fill_between(prof["x"], prof["u"], alpha=0.2, color=PALETTE[0])
            ax.set_title(os.path.splitext(os.path.basename(path))[0])
            ax.set_xlabel("x")
            ax.set_ylabel("u")
        fig.tight_layout()
        return _save(fig, out_path)


def snapshots(in_dir, out_path, max_curves: int = 6):
    """Profile evolution: overlay of evenly spaced snapshot profiles."""
    paths = snapshot_files(in_dir)
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        if not paths:
            _empty(ax, "snapshots/ is empty")
            return _save(fig, out_path)
        count = min(max_curves, len(paths))
        picks = np.unique(np.linspace(0, len(paths) - 1, count).astype(int))
        for j, i in enumerate(picks):
            prof = read_profile(paths[i])
            label = os.path.splitext(os.path.basename(paths[i]))[0]
            ax.plot(prof["x"], prof["u"], color=PALETTE[j % len(PALETTE)], label=label)
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.legend(fontsize=8)
        fig.tight_layout()
        return _save(fig, out_path)


def interface(in_dir, out_path):
    """Free-boundary positions against time."""
    table = read_interface(os.path.join(in_dir, "interface.csv"))
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        if table["t"].size == 0:
            _empty(ax, "interface.csv has no records")
            return _save(fig, out_path)
        ax.plot(table["t"], table["left"], color=PALETTE[0], label="left")
        ax.plot(table["t"], table["right"], color=PALETTE[1], label="right")
        ax.set_xlabel("t")
        ax.set_ylabel("interface position")
        ax.legend()
        fig.tight_layout()
        return _save(fig, out_path)


def criterion(in_dir, out_path):
    """Criterion value against radius on log-log axes, one curve per kind."""
    names = [
        n for n in sorted(os.listdir(in_dir))
        if n.startswith("criterion_") and n.endswith(".csv")
    ]
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        if not names:
            _empty(ax, "no criterion_*.csv files")
            return _save(fig, out_path)
        any_points = False
        for j, name in enumerate(names):
            table = read_criterion(os.path.join(in_dir, name))
            label = name[len("criterion_"):-len(".csv")]
            if table["r"].size:
                any_points = True
            ax.loglog(
                table["r"], table["value"],
                marker="o", markersize=3, color=PALETTE[j % len(PALETTE)],
                label=label,
            )
        if not any_points:
            _empty(ax, "criterion files have no rows")
        ax.set_xlabel("r")
        ax.set_ylabel("criterion value")
        ax.legend()
        fig.tight_layout()
        return _save(fig, out_path)


def scaling(in_dir, out_path):
    """log t* vs log kappa with the fitted line from summary.json.

    The slope annotation quotes summary.json verbatim (3 decimals); the
    line is drawn through the mean of the uncensored points with that
    slope, so the figure shows exactly the fit the study reports.
    """
    summary = read_sweep_summary(os.path.join(in_dir, "summary.json"))
    kappas = np.asarray(summary["parameters"], dtype=float)
    t_stars = np.asarray(
        [np.nan if t is None else t for t in summary["t_stars"]], dtype=float
    )
    keep = np.isfinite(t_stars) & (t_stars > 0.0)
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        if not np.any(keep):
            _empty(ax, "no uncensored waiting times")
            return _save(fig, out_path)
        ax.loglog(
            kappas[keep], t_stars[keep], "o", color=PALETTE[0], label="measured t*"
        )
        slope = summary["slope"]
        if slope is not None:
            lk = np.log(kappas[keep])
            lt = np.log(t_stars[keep])
            intercept = float(np.mean(lt) - slope * np.mean(lk))
            kk = np.array([kappas[keep].min(), kappas[keep].max()])
            ax.loglog(
                kk, np.exp(intercept) * kk**slope,
                "--", color=PALETTE[1], label=f"fit: slope {slope:.3f}",
            )
        ax.set_xlabel("kappa")
        ax.set_ylabel("t*")
        ax.legend()
        fig.tight_layout()
        return _save(fig, out_path)


KINDS = {
    "gallery": gallery,
    "snapshots": snapshots,
    "interface": interface,
    "criterion": criterion,
    "scaling": scaling,
}


def render(kind: str, in_dir, out_path):
    if kind not in KINDS:
        raise SchemaError(f"unknown figure kind {kind!r}; have {sorted(KINDS)}")
    if not os.path.isdir(in_dir):
        raise SchemaError(f"input directory {in_dir} does not exist")
    return KINDS[kind](in_dir, out_path)
