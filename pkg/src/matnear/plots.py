"""Figure rendering for the command-line reports.

Renders matplotlib figures to files next to the delimited output when a
plot path is requested; no interactive backends are touched.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_boundary", "plot_outer_trace", "plot_points"]


def plot_boundary(points, eigvals, path, title=None):
    """Scatter of traced boundary points over the matrix eigenvalues."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    xs = [p.lam.real for p in points]
    ys = [p.lam.imag for p in points]
    ax.plot(xs, ys, "o", ms=3.5, mfc="none", color="tab:blue", label="boundary points")
    ax.plot(
        np.real(eigvals), np.imag(eigvals), "x", color="tab:red", label="eigenvalues"
    )
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_outer_trace(rows, path, r=0.0, title=None):
    """Semilog residual history of the outer iteration."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    ks = [row.k for row in rows]
    ax1.semilogy(ks, [max(abs(row.phi - r), 1e-18) for row in rows], "o-")
    ax1.set_xlabel("outer iteration")
    ax1.set_ylabel("|phi - r|")
    ax2.plot(ks, [row.eps for row in rows], "s-")
    ax2.set_xlabel("outer iteration")
    ax2.set_ylabel("eps")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_points(zs, path, title=None, label="values"):
    """Plain complex-plane scatter (used for common zeros)."""
    fig, ax = plt.subplots(figsize=(4.5, 4))
    zs = np.asarray(zs)
    ax.plot(zs.real, zs.imag, "o", label=label)
    ax.axhline(0.0, color="0.8", lw=0.5)
    ax.axvline(0.0, color="0.8", lw=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
