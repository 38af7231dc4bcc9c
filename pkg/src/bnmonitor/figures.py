"""Diagnostic figures rendered alongside report output.

All functions write a PNG to the given path and close the figure; they are
only imported when the CLI is asked for figures, so headless use without
matplotlib configuration stays cheap.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .monitor import TestReport
from .simulation import SimResult

_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def save_monitor_figure(rep: TestReport, path: str) -> None:
    """Per-(variable, value) W bars against the rejection threshold."""
    cells = rep.per_variable
    labels = [f"{c.variable}={c.value}" for c in cells]
    values = [min(c.w, 10 * rep.z_alpha) if math.isfinite(c.w) else 10 * rep.z_alpha
              for c in cells]
    colors = ["#c0392b" if c.reject else "#2c3e50" for c in cells]

    fig, ax = plt.subplots(figsize=(7, max(2.0, 0.35 * len(cells) + 1.2)))
    y = np.arange(len(cells))
    ax.barh(y, values, color=colors)
    ax.set_yticks(y)
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.axvline(rep.z_alpha, color="#7f8c8d", linestyle="--", label="threshold")
    gw = rep.w if math.isfinite(rep.w) else 10 * rep.z_alpha
    ax.axvline(gw, color="#2980b9", linestyle=":", label="global W")
    ax.set_xlabel("W")
    ax.set_title("conditional score statistics")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_signed_z_figure(result: SimResult, path: str) -> None:
    """Histogram of per-replication standardized means with the standard
    normal density overlaid."""
    z = [r.signed_z for r in result.records if math.isfinite(r.signed_z)]
    fig, ax = plt.subplots(figsize=(6, 4))
    if z:
        ax.hist(z, bins=min(40, max(10, len(z) // 25)), density=True,
                color="#2c3e50", alpha=0.75)
        lo = min(min(z), -4.0)
        hi = max(max(z), 4.0)
        grid = np.linspace(lo, hi, 400)
        ax.plot(grid, np.exp(-grid**2 / 2) / np.sqrt(2 * np.pi), color="#c0392b")
    ax.set_xlabel("signed Z")
    ax.set_ylabel("density")
    ax.set_title("standardized score means across replications")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_rates_figure(result: SimResult, path: str) -> None:
    """Global rejection rate next to each variable's conditional rate."""
    names = ["global"] + list(result.per_variable_rates)
    rates = [result.rejection_rate_global] + list(result.per_variable_rates.values())
    colors = ["#2980b9"] + ["#2c3e50"] * (len(names) - 1)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(names)), 4))
    ax.bar(np.arange(len(names)), rates, color=colors)
    ax.set_xticks(np.arange(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("rejection rate")
    ax.set_title("global vs conditional rejection rates")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
