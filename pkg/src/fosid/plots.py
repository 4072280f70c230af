"""Figure rendering for the report-producing CLI paths.

Every report command writes its delimited data first; the figures saved
here are a convenience view of the same numbers, rendered with the Agg
backend so they work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_dataset_plot",
    "save_reconstruction_plot",
    "save_aberration_plot",
    "save_sweep_plot",
]


def save_dataset_plot(path, dataset, title: str = "") -> None:
    t = dataset.grid.estimation_times()
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    axes[0].plot(t, dataset.u.values, lw=0.9, color="tab:gray")
    axes[0].set_ylabel("input u")
    axes[1].plot(t, dataset.y.values, lw=0.9, color="tab:blue")
    axes[1].set_ylabel("output y")
    axes[1].set_xlabel("t [s]")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_reconstruction_plot(path, t, y, y_hat, residual_history=None, title: str = "") -> None:
    n_rows = 2 if residual_history is not None else 1
    fig, axes = plt.subplots(n_rows, 1, figsize=(8, 3 * n_rows), squeeze=False)
    ax = axes[0][0]
    ax.plot(t, y, label="measured", lw=1.2, color="tab:blue")
    ax.plot(t, y_hat, label="reconstructed", lw=1.0, ls="--", color="tab:red")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("output")
    ax.legend(loc="best")
    if title:
        ax.set_title(title)
    if residual_history is not None:
        ax = axes[1][0]
        ax.semilogy(np.arange(len(residual_history)), residual_history, marker="o", ms=3)
        ax.set_xlabel("Newton iteration")
        ax.set_ylabel("||J|| / ||R||")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_aberration_plot(path, t, outputs, labels=("zero", "ramp", "quartic")) -> None:
    fig, ax = plt.subplots(figsize=(8, 4))
    for y, label in zip(outputs, labels):
        ax.plot(t, y, lw=1.0, label=f"precharge: {label}")
    ax.axvline(5.0, color="k", lw=0.8, ls=":")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("response")
    ax.legend(loc="best")
    ax.set_title("identical input after t = 5, different pre-start drives")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_plot(path, report, value_column: str = "re_output_percent") -> None:
    """Heatmap over (n_cycles, n_output_cycles) or a line when one is fixed."""
    ok = [r for r in report.rows if r.get("status") == "ok" and value_column in r]
    if not ok:
        return
    ncs = sorted({r["n_cycles"] for r in ok})
    n0s = sorted({r["n_output_cycles"] for r in ok})
    fig, ax = plt.subplots(figsize=(7, 5))
    if len(ncs) > 1 and len(n0s) > 1:
        grid = np.full((len(n0s), len(ncs)), np.nan)
        for r in ok:
            grid[n0s.index(r["n_output_cycles"]), ncs.index(r["n_cycles"])] = r[value_column]
        im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
        ax.set_xticks(range(len(ncs)), [str(v) for v in ncs])
        ax.set_yticks(range(len(n0s)), [str(v) for v in n0s])
        ax.set_xlabel("history cycles N_C")
        ax.set_ylabel("estimation cycles N_0")
        fig.colorbar(im, ax=ax, label=value_column)
    else:
        xkey = "n_cycles" if len(ncs) > 1 else "n_output_cycles"
        xs = [r[xkey] for r in ok]
        ys = [r[value_column] for r in ok]
        ax.plot(xs, ys, marker="o")
        ax.set_xlabel(xkey)
        ax.set_ylabel(value_column)
        if min(ys) > 0:
            ax.set_yscale("log")
    ax.set_title(f"sweep of {report.source}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
