"""Self-contained SVG figures: sweep line charts and ternary heatmaps."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("svg")

import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.collections import PolyCollection
from matplotlib.colors import Normalize
from matplotlib.figure import Figure

from .io import read_state_csv, read_sweep_csv

SQRT3 = np.sqrt(3.0)

matplotlib.rcParams["svg.hashsalt"] = "moranrte"
matplotlib.rcParams["svg.fonttype"] = "path"


def _save(fig: Figure, out) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasSVG(fig)
    fig.savefig(out, format="svg", metadata={"Date": None, "Creator": None})
    return out


def ternary_coordinates(states: np.ndarray) -> np.ndarray:
    """Barycentric projection of ``(a1, a2, a3)`` onto an equilateral triangle.

    Type 1 sits at (0, 0), type 2 at (1, 0), type 3 at (1/2, sqrt(3)/2).
    """
    states = np.asarray(states, dtype=float)
    N = states[0].sum()
    x = (states[:, 1] + 0.5 * states[:, 2]) / N
    y = (SQRT3 / 2) * states[:, 2] / N
    return np.column_stack([x, y])


def _hexagons(centers: np.ndarray, N: int) -> np.ndarray:
    r = 1.0 / (N * SQRT3)
    angles = np.pi / 6 + np.arange(6) * np.pi / 3
    offsets = np.column_stack([np.cos(angles), np.sin(angles)]) * r
    return centers[:, None, :] + offsets[None, :, :]


def simplex_heatmap(states: np.ndarray, values: np.ndarray, out, title: str | None = None, label: str = "probability") -> Path:
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[1] != 3:
        raise ValueError(f"simplex heatmaps need three-type states, got n={states.shape[-1]}")
    N = int(states[0].sum())
    centers = ternary_coordinates(states)
    fig = Figure(figsize=(6, 5.4))
    ax = fig.add_subplot(1, 1, 1)
    norm = Normalize(vmin=float(np.min(values)), vmax=float(np.max(values)))
    cells = PolyCollection(_hexagons(centers, N), array=np.asarray(values, dtype=float), cmap="viridis", norm=norm, edgecolors="none")
    ax.add_collection(cells)
    ax.plot([0, 1, 0.5, 0], [0, 0, SQRT3 / 2, 0], color="black", linewidth=0.8)
    ax.set_xlim(-0.05, 1.05)
    ax.set_ylim(-0.05, SQRT3 / 2 + 0.05)
    ax.set_aspect("equal")
    ax.axis("off")
    for (x, y), name in zip([(0, 0), (1, 0), (0.5, SQRT3 / 2)], ["A1", "A2", "A3"]):
        ax.annotate(name, (x, y), textcoords="offset points", xytext=(0, -12 if y == 0 else 6), ha="center")
    fig.colorbar(cells, ax=ax, label=label)
    if title:
        ax.set_title(title)
    return _save(fig, out)


def sweep_chart(x: np.ndarray, entropy_rate: np.ndarray, series: dict, out, param: str = "parameter", normalized: bool = False) -> Path:
    """Three stacked panels: entropy rate, stationary probability, RTE."""
    fig = Figure(figsize=(7, 9))
    axes = [fig.add_subplot(3, 1, i + 1) for i in range(3)]
    axes[0].plot(x, entropy_rate, color="tab:green", label="entropy rate")
    axes[0].set_ylabel("entropy rate")
    rte_key = "rte_normalized" if normalized else "rte"
    for label, values in series.items():
        axes[1].plot(x, values["s"], label=label)
        axes[2].plot(x, values[rte_key], label=label)
    axes[1].set_ylabel("stationary probability")
    axes[2].set_ylabel("normalized RTE" if normalized else "RTE")
    axes[2].set_xlabel(param)
    for ax in axes:
        if ax.lines:
            ax.legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, out)


def plot_file(data_path, kind: str, out, normalized: bool = False) -> Path:
    """Render a CSV written by ``analyze`` (heatmap) or ``sweep`` (line chart)."""
    if kind == "simplex-heatmap":
        states, probs = read_state_csv(data_path)
        return simplex_heatmap(states, probs, out)
    if kind == "line-chart":
        x, h, series = read_sweep_csv(data_path)
        return sweep_chart(x, h, series, out, normalized=normalized)
    raise ValueError(f"unknown plot kind {kind!r}")
