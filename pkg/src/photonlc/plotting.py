"""Deterministic SVG figures (Agg backend, fixed hash salt, no timestamps)."""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import CorrelationSeries  # noqa: E402


def _svg(fig, description: str) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "photonlc", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Description": description})
    plt.close(fig)
    return buf.getvalue()


def correlation_svg(series: CorrelationSeries, title: str = "", description: str = "") -> str:
    """Grouped means with one-standard-deviation bars."""
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    xs = [r.x for r in series.rows]
    ax.errorbar(
        xs,
        [r.mean_y for r in series.rows],
        yerr=[r.std_y for r in series.rows],
        fmt="o",
        ms=3,
        capsize=2,
        color="#1f4e79",
    )
    ax.set_xlabel(series.x_metric)
    ax.set_ylabel(f"mean {series.y_metric}")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return _svg(fig, description)


def fidelity_svg(labels: Sequence[str], values: Sequence[float], errors: Sequence[float], description: str = "") -> str:
    fig, ax = plt.subplots(figsize=(4.5, 3.0))
    ax.bar(range(len(values)), values, yerr=errors, color="#6a8caf", capsize=3)
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("EPR fidelity")
    ax.set_ylim(min(0.5, min(values, default=1.0) - 0.05), 1.0)
    fig.tight_layout()
    return _svg(fig, description)
