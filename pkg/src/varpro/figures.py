"""Matplotlib figure rendering for scans, runs, and generated problems.

Figures are a convenience companion to the CSV/PGM outputs; the delimited
files remain the canonical record.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp.png")
    fig.savefig(tmp, dpi=130, bbox_inches="tight")
    plt.close(fig)
    tmp.replace(path)


def render_scan(path, rows) -> None:
    """Reduced functional and its derivative over the scanned widths."""
    sigma = np.array([r[0] for r in rows])
    phi = np.array([r[1] for r in rows])
    dphi = np.array([r[2] for r in rows])
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].plot(sigma, phi, "b-")
    axes[0].set_xlabel(r"$\sigma$")
    axes[0].set_ylabel(r"$\varphi(\sigma)$")
    finite = np.isfinite(phi)
    if finite.any():
        best = sigma[finite][np.argmin(phi[finite])]
        axes[0].axvline(best, color="gray", ls=":", label=f"argmin {best:.2f}")
        axes[0].legend()
    axes[1].plot(sigma, dphi, "r-")
    axes[1].axhline(0.0, color="gray", lw=0.6)
    axes[1].set_xlabel(r"$\sigma$")
    axes[1].set_ylabel(r"$\varphi'(\sigma)$")
    fig.tight_layout()
    _save(fig, path)


def render_convergence(path, trace) -> None:
    """Parameter, objective, and error curves per outer iteration."""
    ks = [r.k for r in trace.records]
    ys = [float(np.atleast_1d(r.y)[0]) for r in trace.records]
    phis = [r.phi for r in trace.records]
    rres = [r.rre_x for r in trace.records]
    have_rre = all(r is not None for r in rres) and len(rres) > 0

    ncols = 3 if have_rre else 2
    fig, axes = plt.subplots(1, ncols, figsize=(3.6 * ncols, 3.2))
    axes[0].plot(ks, ys, "o-")
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("blur width")
    axes[1].semilogy(ks, phis, "o-")
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("objective")
    if have_rre:
        axes[2].semilogy(ks, rres, "o-")
        axes[2].set_xlabel("iteration")
        axes[2].set_ylabel("RRE(x)")
    fig.tight_layout()
    _save(fig, path)


def render_problem(path, x_true, b, dimension: int, n: int) -> None:
    """Ground truth next to the blurred noisy observation."""
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.4))
    if dimension == 2:
        for ax, img, title in zip(
            axes,
            (x_true.reshape(n, n, order="F"), b.reshape(n, n, order="F")),
            ("true image", "blurred + noise"),
        ):
            ax.imshow(img, cmap="gray")
            ax.set_title(title)
            ax.axis("off")
    else:
        axes[0].plot(x_true, "b-")
        axes[0].set_title("true signal")
        axes[1].plot(b, "r-")
        axes[1].set_title("blurred + noise")
    fig.tight_layout()
    _save(fig, path)
