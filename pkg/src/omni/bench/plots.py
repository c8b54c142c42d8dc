"""Report figures, rendered headlessly to PNG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_degradation_curve(
    bins: dict[int, float], xlabel: str, path: str | Path, title: str
) -> Path:
    """Accuracy-versus-recall-burden line chart for one binning."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    if bins:
        xs = sorted(bins)
        ys = [bins[x] for x in xs]
        ax.plot(xs, ys, marker="o")
        ax.set_xticks(xs)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_msib_scores(dimensions: dict[str, dict], path: str | Path, title: str) -> Path:
    """Grouped bars: content / speech / average score per dimension."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 4))
    dims = list(dimensions)
    width = 0.27
    for offset, key in ((-width, "content"), (0.0, "speech"), (width, "average")):
        xs = [i + offset for i in range(len(dims))]
        ys = [dimensions[d][key] for d in dims]
        ax.bar(xs, ys, width=width, label=key)
    ax.set_xticks(range(len(dims)))
    ax.set_xticklabels(dims, rotation=20, ha="right", fontsize=8)
    ax.set_ylim(0, 5.2)
    ax.set_ylabel("score (1-5)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
