"""Figure rendering for benchmark runs (written next to the report files)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_source_figures(result, out_dir, stem: str) -> list:
    """Surface heatmap (2-D sources) and GA value distributions vs the
    certified optimum; returns the written paths."""
    written = []
    if result.dataset.dim == 2:
        p = out_dir / f"{stem}.surface.png"
        _surface(result, p)
        written.append(p)
    p = out_dir / f"{stem}.values.png"
    _value_spread(result, p)
    written.append(p)
    return written


def _surface(result, path):
    X, y = result.dataset.X, result.dataset.y
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    xs = np.unique(X[:, 0])
    ys = np.unique(X[:, 1])
    if xs.size * ys.size == y.size:
        grid = np.full((ys.size, xs.size), np.nan)
        ix = np.searchsorted(xs, X[:, 0])
        iy = np.searchsorted(ys, X[:, 1])
        grid[iy, ix] = y
        mesh = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="viridis")
    else:
        mesh = ax.scatter(X[:, 0], X[:, 1], c=y, s=12, cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="response")
    for sense, marker, color in (("max", "*", "red"), ("min", "v", "white")):
        sol = result.opt[sense]
        ax.plot(sol.x[0], sol.x[1], marker, color=color, markersize=13,
                markeredgecolor="black", label=f"certified {sense}")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(f"{result.name}: fitted response surface data")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _value_spread(result, path):
    senses = ("max", "min")
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    presets = sorted({p for (p, _) in result.ga_values})
    for ax, sense in zip(axes, senses):
        data = [[run.value for run in result.ga_values[(p, sense)]] for p in presets]
        if data:
            ax.boxplot(data)
            ax.set_xticks(range(1, len(presets) + 1))
            ax.set_xticklabels(presets, fontsize=8)
        ax.axhline(result.opt[sense].value, color="red", linestyle="--",
                   label="certified optimum")
        ax.set_title(f"{result.name} {sense}")
        ax.set_ylabel("objective value")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
