"""Static convergence figures rendered next to the CSV history."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["save_convergence_plot", "save_solution_plot"]


def save_convergence_plot(history, path, title=None, has_truth=False):
    """Semilog convergence curve from a list of HistoryRecord."""
    if not history:
        return
    iters = [h.iteration for h in history]
    vals = [max(h.error_or_residual, 1e-300) for h in history]
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    label = "relative error" if has_truth else "relative residual"
    ax.semilogy(iters, vals, "-o", markersize=3, label=label)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel(label)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_solution_plot(x, path, x_true=None, title=None):
    """Component plot of the computed solution, optionally with the truth."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    if x_true is not None:
        ax.plot(x_true, lw=1.0, label="true solution")
    ax.plot(x, lw=1.0, ls="--" if x_true is not None else "-",
            label="computed solution")
    ax.set_xlabel("component index")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
