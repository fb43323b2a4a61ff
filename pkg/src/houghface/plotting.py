"""Matplotlib figures written next to evaluation reports and stage dumps.

Everything renders through :class:`matplotlib.figure.Figure` with the Agg
canvas, so no pyplot state or display is involved.
"""

import functools
from pathlib import Path

import matplotlib as mpl
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}

# fixed metadata keeps PNG bytes stable between runs
_PNG_META = {"Software": None}


def _styled(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with mpl.rc_context(STYLE):
            return func(*args, **kwargs)
    return wrapper


def _figure(width=6.4, height=4.0):
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    path = Path(path)
    fig.savefig(path, format="png", metadata=_PNG_META)
    return path


def figure_paths(report_path):
    """Sibling PNG names for a report file."""
    p = Path(report_path)
    stem = p.with_suffix("") if p.suffix else p
    return {
        "metrics": Path(f"{stem}_metrics.png"),
        "distances": Path(f"{stem}_distances.png"),
    }


@_styled
def plot_metrics(counts, report, path):
    """Confusion matrix next to a bar chart of the percentage metrics."""
    fig = _figure(8.0, 3.4)
    ax_cm, ax_bar = fig.subplots(1, 2, gridspec_kw={"width_ratios": [1, 1.6]})

    cm = np.array([[counts.tp, counts.fp], [counts.fn, counts.tn]])
    ax_cm.imshow(cm, cmap="Blues", vmin=0)
    labels = [["TP", "FP"], ["FN", "TN"]]
    hi = cm.max() if cm.max() else 1
    for i in range(2):
        for j in range(2):
            ax_cm.text(j, i, f"{labels[i][j]}\n{cm[i, j]}", ha="center", va="center",
                       color="white" if cm[i, j] > hi / 2 else "black")
    ax_cm.set_xticks([0, 1], ["genuine", "impostor"])
    ax_cm.set_yticks([0, 1], ["accepted", "rejected"])
    ax_cm.set_title("confusion counts")

    names = ["sensitivity", "specificity", "accuracy"]
    values = [getattr(report, n) for n in names]
    xs = np.arange(len(names))
    bars = ax_bar.bar(xs, [0 if v is None else v for v in values], color="#4477aa")
    for bar, v in zip(bars, values):
        ax_bar.text(bar.get_x() + bar.get_width() / 2, bar.get_height() + 1,
                    "n/a" if v is None else f"{v:.2f}", ha="center", va="bottom")
    ax_bar.set_xticks(xs, names)
    ax_bar.set_ylim(0, 110)
    ax_bar.set_ylabel("percent")
    ax_bar.set_title("identification metrics")
    fig.tight_layout()
    return _save(fig, path)


@_styled
def plot_distance_histogram(trials, path, bins=30):
    """Best-match distance of genuine vs impostor probes."""
    fig = _figure()
    ax = fig.add_subplot()
    gen = [t.distance for t in trials if t.role == "genuine" and t.distance is not None]
    imp = [t.distance for t in trials if t.role == "impostor" and t.distance is not None]
    both = gen + imp
    if both:
        edges = np.histogram_bin_edges(both, bins=bins)
        if gen:
            ax.hist(gen, bins=edges, alpha=0.6, label=f"genuine (n={len(gen)})")
        if imp:
            ax.hist(imp, bins=edges, alpha=0.6, label=f"impostor (n={len(imp)})")
        ax.legend(frameon=False)
    else:
        ax.text(0.5, 0.5, "no matched probes", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_xlabel("best gallery dissimilarity")
    ax.set_ylabel("probes")
    fig.tight_layout()
    return _save(fig, path)


@_styled
def plot_stages(stages, path, block_size):
    """Gray input, gradient, dilated binary map with the selected blocks."""
    fig = _figure(7.5, 3.6)
    axes = fig.subplots(1, 3)
    axes[0].imshow(stages.gray, cmap="gray", vmin=0, vmax=255)
    axes[0].set_title("input")
    axes[1].imshow(stages.gradient, cmap="magma")
    axes[1].set_title("8-direction gradient")
    axes[2].imshow(stages.dilated, cmap="gray", vmin=0, vmax=1)
    for b in stages.blocks:
        axes[2].add_patch(Rectangle((b.x - 0.5, b.y - 0.5), block_size, block_size,
                                    fill=False, edgecolor="#ee6677", linewidth=1.2))
    axes[2].set_title(f"{len(stages.blocks)} blocks")
    for ax in axes:
        ax.set_axis_off()
    fig.tight_layout()
    return _save(fig, path)
