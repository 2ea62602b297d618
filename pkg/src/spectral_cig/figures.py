"""Matplotlib renderers for the report artifacts.

Each helper draws one figure and writes it straight to a file; nothing is
shown interactively.  The CLI drops these next to its delimited/JSON outputs.
"""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .estimator import EdgeSet

__all__ = ["render_heatmap", "render_graph", "render_benchmark"]


def render_heatmap(matrix: np.ndarray, path, title: str = "edge strength") -> None:
    """Save a matrix heatmap (e.g. aggregated block norms) as an image."""
    matrix = np.asarray(matrix, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(matrix, cmap="viridis", interpolation="nearest")
    ax.set_title(title)
    ax.set_xlabel("node")
    ax.set_ylabel("node")
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_graph(edges: EdgeSet, path, title: str = "estimated graph") -> None:
    """Save a circular-layout drawing of a weighted graph."""
    p = edges.p
    angles = 2.0 * np.pi * np.arange(p) / max(p, 1)
    xs, ys = np.cos(angles), np.sin(angles)
    weights = edges.normalized_weights()

    fig, ax = plt.subplots(figsize=(6, 6))
    cmap = plt.get_cmap("plasma")
    for (q, l), w in sorted(weights.items()):
        ax.plot(
            [xs[q], xs[l]],
            [ys[q], ys[l]],
            color=cmap(0.85 * w),
            linewidth=0.5 + 2.5 * w,
            alpha=0.8,
            zorder=1,
        )
    ax.scatter(xs, ys, s=120, color="#1f4e79", zorder=2)
    if p <= 40:
        for q in range(p):
            ax.annotate(
                str(q),
                (1.08 * xs[q], 1.08 * ys[q]),
                ha="center",
                va="center",
                fontsize=8,
            )
    ax.set_title(f"{title} ({len(edges)} edges)")
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_benchmark(table, path) -> None:
    """Save a bar chart of mean F1 (with std bars) per penalty family."""
    families = list(table.cells)
    means = [table.cells[f].mean_f1 for f in families]
    stds = [table.cells[f].std_f1 for f in families]

    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.arange(len(families))
    ax.bar(xs, means, yerr=stds, capsize=4, color="#4878a8")
    ax.set_xticks(xs)
    ax.set_xticklabels(families)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("F1")
    ax.set_title(
        f"model {table.scenario.model}, p={table.scenario.p}, m={table.scenario.m}, "
        f"n={table.scenario.n}, {table.runs} runs"
    )
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
