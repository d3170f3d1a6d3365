"""Render per-lint statistics to an image file.

Uses matplotlib's Agg canvas directly so rendering works headless and never
touches pyplot's global state.
"""

from __future__ import annotations

import os
from typing import Sequence

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .crater import StatsRow

__all__ = ["render_stats_figure"]

_SERIES = (
    ("individual_items", "individual items", "#4878a8"),
    ("different_releases", "different releases", "#e8a33d"),
    ("affected_crates", "affected crates", "#6aa84f"),
)


def render_stats_figure(stats: Sequence[StatsRow], destination: str | os.PathLike) -> None:
    """Write a grouped horizontal bar chart of the per-lint counts."""
    height = max(2.8, 0.9 * len(stats) + 1.6)
    fig = Figure(figsize=(9, height), dpi=150)
    FigureCanvasAgg(fig)
    ax = fig.subplots()
    if not stats:
        ax.set_axis_off()
        ax.text(0.5, 0.5, "no reported findings", ha="center", va="center", fontsize=12)
        fig.suptitle("semver violations per lint")
        fig.savefig(destination)
        return

    # Stats arrive sorted by individual_items descending; plot top row first.
    positions = range(len(stats) - 1, -1, -1)
    bar_height = 0.26
    for offset_index, (field, label, color) in enumerate(_SERIES):
        offsets = [pos + (1 - offset_index) * bar_height for pos in positions]
        values = [getattr(row, field) for row in stats]
        bars = ax.barh(offsets, values, height=bar_height, label=label, color=color)
        ax.bar_label(bars, padding=2, fontsize=8)
    ax.set_yticks(list(positions))
    ax.set_yticklabels([row.lint_id for row in stats], fontsize=9, family="monospace")
    ax.set_xlabel("count")
    ax.set_title("semver violations per lint")
    ax.legend(loc="lower right", fontsize=9)
    ax.margins(x=0.12)
    fig.tight_layout()
    fig.savefig(destination)
