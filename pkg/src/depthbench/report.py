"""Static figures for evaluation runs (written to files, never shown)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap, LogNorm  # noqa: E402

from .depthio import colorize, colorize_t  # noqa: E402

FIG_DPI = 120


def depth_colormap(n=256):
    """The blue-green-red ramp used by :func:`depthbench.depthio.colorize`."""
    return ListedColormap(colorize_t(np.linspace(0.0, 1.0, n)) / 255.0, name="depthbench")


def render_comparison(gt, pred, scheme, path, title=None):
    """Ground truth and prediction side by side over a shared log-depth colorbar."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.2), constrained_layout=True)
    for ax, depth, name in zip(axes, (gt, pred), ("ground truth", "prediction")):
        ax.imshow(colorize(depth, scheme), interpolation="nearest")
        ax.set_title(name, fontsize=10)
        ax.set_axis_off()
    mappable = plt.cm.ScalarMappable(norm=LogNorm(scheme.alpha, scheme.beta), cmap=depth_colormap())
    cbar = fig.colorbar(mappable, ax=axes, orientation="horizontal", fraction=0.08, pad=0.04)
    cbar.set_label("depth [m] (blue is nearer)")
    if title:
        fig.suptitle(title, fontsize=11)
    fig.savefig(Path(path), dpi=FIG_DPI)
    plt.close(fig)


def render_run_summary(run, path, title=None):
    """Per-image AbsRel and delta<1.25 bars with the aggregate drawn as a line."""
    ids = [r.entry_id for r in run.per_image]
    abs_rel = [r.report.abs_rel for r in run.per_image]
    delta1 = [r.report.delta1 for r in run.per_image]

    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(max(6, 0.25 * len(ids) + 3), 5), sharex=True)
    ax0.bar(ids, abs_rel, color="tab:red")
    ax0.axhline(run.aggregate.abs_rel, color="k", lw=1, ls="--")
    ax0.set_ylabel("AbsRel")
    ax1.bar(ids, delta1, color="tab:blue")
    ax1.axhline(run.aggregate.delta1, color="k", lw=1, ls="--")
    ax1.set_ylabel(r"$\delta < 1.25$")
    ax1.set_ylim(0, 1.05)
    ax1.set_xlabel("manifest entry")
    if title:
        ax0.set_title(title)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=FIG_DPI)
    plt.close(fig)


def render_boundaries(scheme, path):
    """Bin edges of the scheme on a linear depth axis, one tick per edge."""
    from .discretization import boundaries

    edges = boundaries(scheme)
    fig, ax = plt.subplots(figsize=(8, 1.6))
    ax.vlines(edges, 0, 1, color="k", lw=0.7)
    ax.set_xlim(edges[0], edges[-1])
    ax.set_yticks([])
    ax.set_xlabel("depth [m]")
    ax.set_title(f"{scheme.mode.value.upper()} boundaries, K={scheme.num_classes}", fontsize=10)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=FIG_DPI)
    plt.close(fig)
