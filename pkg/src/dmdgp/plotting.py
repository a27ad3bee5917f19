"""Render report figures to files next to the CSV output.

Uses the Agg backend so figure generation works headless; every function
writes a file and returns its path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_width_profile(profile, path, title: str | None = None) -> str:
    """Step plot of predicted (and measured, when present) nodes per level,
    on a log2 axis."""
    fig, ax = plt.subplots(figsize=(7, 4))
    levels = np.asarray(profile.levels)
    predicted = np.log2(np.asarray([float(p) for p in profile.predicted]))
    ax.step(levels, predicted, where="mid", label="predicted", lw=1.8)
    if profile.measured is not None:
        nonzero = [(lvl, m) for lvl, m in zip(profile.levels,
                                              profile.measured) if m > 0]
        if nonzero:
            xs, ms = zip(*nonzero)
            ax.plot(xs, np.log2(np.asarray(ms, dtype=float)), "o",
                    ms=4, label="measured", color="C3", alpha=0.8)
    ax.set_xlabel("tree level")
    ax.set_ylabel("log2 nodes")
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_search_stats(stats, path, title: str | None = None) -> str:
    """Valid vs pruned nodes per level for one solver run."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(stats.levels, stats.nodes_per_level, lw=1.5, label="valid nodes")
    ax.plot(stats.levels, stats.pruned_per_level, lw=1.2, ls="--",
            color="C3", label="pruned candidates")
    ax.set_xlabel("tree level")
    ax.set_ylabel("count")
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
