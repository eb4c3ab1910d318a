"""Figure rendering for the report path (matplotlib, Agg backend).

Figures accompany the delimited tables: a heatmap of the passage-time
matrix, grouped bars for the degree aggregates against their classical
companions, and per-vertex detection curves for distribution tables.
Unreachable entries are drawn as gaps, matching the ``inf`` table cells.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_PNG_META = {"Software": "tomwalk"}


def _title(meta: dict) -> str:
    gen = meta.get("generation", "-")
    gen_part = "" if gen in ("-", None) else f" g={gen}"
    return f"{meta.get('experiment', '')}{gen_part} view={meta.get('view', '')} initial={meta.get('initial', '')}"


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_matrix(n: int, matrix_rows: list[list], path: Path, meta: dict) -> Path:
    """Heatmap of passage times; infinite cells are hatched out as gaps."""
    grid = np.full((n, n), np.nan)
    for i, j, value, *_ in matrix_rows:
        if math.isfinite(value):
            grid[i, j] = value
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    masked = np.ma.masked_invalid(grid)
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("#d0d0d0")
    im = ax.imshow(masked, cmap=cmap, origin="upper")
    fig.colorbar(im, ax=ax, label="expected steps")
    ax.set_xlabel("target vertex")
    ax.set_ylabel("source vertex")
    ax.set_title(f"passage times, {_title(meta)}", fontsize=10)
    return _save(fig, path)


def plot_degree_table(deg_rows: list[list], path: Path, meta: dict) -> Path:
    """Grouped bars of degree aggregates; missing bars mean unreachable."""
    degrees = [row[0] for row in deg_rows]
    xs = np.arange(len(degrees))
    width = 0.35
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
    panels = (
        (ax1, "passage time", 2, 6),
        (ax2, "return time", 4, 7),
    )
    for ax, label, q_idx, c_idx in panels:
        qvals = [row[q_idx] for row in deg_rows]
        cvals = [row[c_idx] for row in deg_rows]
        q_draw = [v if math.isfinite(v) else 0.0 for v in qvals]
        ax.bar(xs - width / 2, q_draw, width, label="walk", color="#377eb8")
        ax.bar(xs + width / 2, cvals, width, label="classical", color="#999999")
        for x, v in zip(xs, qvals):
            if not math.isfinite(v):
                ax.text(x - width / 2, 0.02 * max(cvals), "inf", ha="center", fontsize=8)
        ax.set_xticks(xs)
        ax.set_xticklabels(degrees)
        ax.set_xlabel("vertex degree")
        ax.set_ylabel(f"mean {label} (steps)")
        ax.legend(fontsize=8)
    fig.suptitle(f"degree aggregates, {_title(meta)}", fontsize=10)
    fig.tight_layout()
    return _save(fig, path)


def plot_distribution(table: np.ndarray, path: Path, meta: dict) -> Path:
    """Per-vertex detection probability against step number."""
    t_steps, n = table.shape
    fig, ax = plt.subplots(figsize=(7.2, 4.4))
    alpha = 1.0 if n <= 16 else 0.35
    for v in range(n):
        ax.plot(range(t_steps), table[:, v], alpha=alpha, lw=1.2,
                label=f"vertex {v}" if n <= 8 else None)
    ax.set_xlabel("step")
    ax.set_ylabel("detection probability")
    ax.set_title(f"evolution, {_title(meta)}", fontsize=10)
    if n <= 8:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
