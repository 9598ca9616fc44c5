"""Matplotlib rendering of analysis tables, written next to the CSV output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import PosPairRow


def _pair_grid(rows: Sequence[PosPairRow], attr: str) -> tuple[list[str], list[str], np.ndarray]:
    pre_tags = sorted({r.pre for r in rows})
    post_tags = sorted({r.post for r in rows})
    grid = np.full((len(pre_tags), len(post_tags)), np.nan)
    for row in rows:
        value = getattr(row, attr)
        if value is not None:
            grid[pre_tags.index(row.pre), post_tags.index(row.post)] = value
    return pre_tags, post_tags, grid


def save_pos_pair_heatmap(
    rows: Sequence[PosPairRow], attr: str, title: str, path: str | Path
) -> None:
    """Heatmap of counts or median errors per (pre, post) tag pair."""
    pre_tags, post_tags, grid = _pair_grid(rows, attr)
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(post_tags)), max(5, 0.5 * len(pre_tags))))
    image = ax.imshow(grid, aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(post_tags)), post_tags, rotation=45, ha="right")
    ax.set_yticks(range(len(pre_tags)), pre_tags)
    ax.set_xlabel("tag after boundary")
    ax.set_ylabel("tag before boundary")
    ax.set_title(title)
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pos_distribution_figure(
    shares: dict[str, tuple[float | None, float | None]], path: str | Path
) -> None:
    """Grouped bars: per-tag share of the human vs machine portions."""
    tags = sorted(shares)
    human = [shares[t][0] or 0.0 for t in tags]
    machine = [shares[t][1] or 0.0 for t in tags]
    x = np.arange(len(tags))
    fig, ax = plt.subplots(figsize=(max(7, 0.7 * len(tags)), 4.5))
    ax.bar(x - 0.2, human, width=0.4, label="human portion")
    ax.bar(x + 0.2, machine, width=0.4, label="machine portion")
    ax.set_xticks(x, tags, rotation=45, ha="right")
    ax.set_ylabel("share of words")
    ax.set_title("Tag usage by portion")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_boundary_histogram_figure(counts: np.ndarray, path: str | Path) -> None:
    """Bar chart of boundary locations over relative text position."""
    bins = len(counts)
    edges = np.arange(bins) / bins
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.bar(edges, counts, width=1.0 / bins, align="edge", edgecolor="white")
    ax.set_xlabel("relative boundary position")
    ax.set_ylabel("records")
    ax.set_title("Boundary location distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_error_histogram(abs_errors: Sequence[int], path: str | Path) -> None:
    """Histogram of absolute boundary errors for an evaluation run."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    top = max(abs_errors) if abs_errors else 1
    ax.hist(abs_errors, bins=min(40, max(top, 1) + 1), edgecolor="white")
    ax.set_xlabel("absolute boundary error (words)")
    ax.set_ylabel("records")
    ax.set_title("Boundary error distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
