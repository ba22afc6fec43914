"""SVG figures for sections and time-step history (presentation only)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

FIELD_LABELS = {"n": "n", "mx": "n u_x", "my": "n u_y", "mz": "n u_z"}


def _plot_cut(ax, coords, state, grid, fixed_index, axis, name):
    if axis == "y":
        values = getattr(state, name)[1:-1, fixed_index]
    else:
        values = getattr(state, name)[fixed_index, 1:-1]
    ax.plot(coords, values, marker=".", markersize=3, linewidth=1.0,
            label=FIELD_LABELS[name])


def plot_sections(state, grid, scheme: str, t: float, out_dir: Path,
                  tag: str) -> None:
    """Line plots of all fields along the midline cuts y=0.5 and x=0.5."""
    xs = grid.cell_centers_x()
    ys = grid.cell_centers_y()
    j_mid = int(np.argmin(np.abs(ys - 0.5))) + 1
    i_mid = int(np.argmin(np.abs(xs - 0.5))) + 1
    for axis, coords, fixed in (("y", xs, j_mid), ("x", ys, i_mid)):
        fig, ax = plt.subplots(figsize=(6, 4))
        for name in ("n", "mx", "my", "mz"):
            _plot_cut(ax, coords, state, grid, fixed, axis, name)
        ax.set_xlabel("x" if axis == "y" else "y")
        ax.set_ylabel("fields")
        ax.set_title(f"{scheme} at t={t:g}, section {axis}=0.5")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(out_dir / f"section_{axis}0.5_{tag}.svg")
        plt.close(fig)


def plot_dt_history(dt_history: np.ndarray, scheme: str,
                    out_dir: Path) -> None:
    """Time step against simulated time, log scale."""
    t = np.cumsum(dt_history)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(t, dt_history, linewidth=1.0, label=f"{scheme} dt")
    ax.set_xlabel("t")
    ax.set_ylabel("dt")
    ax.set_title(f"time-step history ({scheme})")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_dir / "dt_history.svg")
    plt.close(fig)
