"""Figures for trajectories, drawn with the object-oriented matplotlib API
on an Agg canvas so no display is needed."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    FigureCanvasAgg(fig)
    fig.savefig(tmp, format="png", dpi=110)
    tmp.replace(path)
    return path


def _col(frames, attr):
    return np.array([getattr(f, attr) for f in frames])


def overview_figure(frames, title: str = "") -> Figure:
    """Masses, parameters, order parameter and correlation deficit."""
    t = _col(frames, "time")
    fig = Figure(figsize=(9, 6.5))
    ax = fig.subplots(2, 2, sharex=True)

    lam = _col(frames, "masses")
    for j in range(lam.shape[1]):
        ax[0, 0].plot(t, lam[:, j], lw=1.2, label=rf"$\lambda_{{{j + 1}}}$")
    ax[0, 0].set_ylabel(r"$\|\psi_j\|$")
    if lam.shape[1] <= 8:
        ax[0, 0].legend(fontsize=7, ncol=2)

    th = _col(frames, "thetas")
    for j in range(th.shape[1]):
        ax[0, 1].plot(t, th[:, j], lw=1.2)
    ax[0, 1].set_ylabel(r"$\theta_j$")

    ax[1, 0].plot(t, _col(frames, "zeta_norm"), color="k", lw=1.4)
    ax[1, 0].set_ylabel(r"$\|\zeta\|$")
    ax[1, 0].set_xlabel("t")

    deficit = 1.0 - _col(frames, "min_corr")
    pos = deficit > 0
    if np.any(pos):
        ax[1, 1].semilogy(t[pos], deficit[pos], color="C3", lw=1.4)
    ax[1, 1].set_ylabel(r"$1 - \min_{j<k}\,\mathrm{Re}\langle\phi_j,\phi_k\rangle$")
    ax[1, 1].set_xlabel("t")

    for a in ax.flat:
        a.grid(alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def correlation_plane_figure(frames, reference=None, title: str = "") -> Figure:
    """Path of z = <phi_1, phi_2> in the unit disk, optionally over a
    reference path."""
    z = np.array([f.corr_re[0, 1] + 1j * f.corr_im[0, 1] for f in frames])
    fig = Figure(figsize=(5.2, 5))
    ax = fig.subplots()
    s = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(s), np.sin(s), color="0.7", lw=0.8)
    if reference is not None:
        zr = np.array([f.corr_re[0, 1] + 1j * f.corr_im[0, 1] for f in reference])
        ax.plot(zr.real, zr.imag, color="C1", lw=2.5, alpha=0.5, label="reduced")
    ax.plot(z.real, z.imag, color="C0", lw=1.0, label="full")
    ax.plot([z[0].real], [z[0].imag], "o", color="C0", ms=4)
    ax.set_aspect("equal")
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.set_xlabel(r"Re $z$")
    ax.set_ylabel(r"Im $z$")
    if reference is not None:
        ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def save_overview(frames, path, title: str = "") -> Path:
    return _save(overview_figure(frames, title), path)


def save_correlation_plane(frames, path, reference=None, title: str = "") -> Path:
    return _save(correlation_plane_figure(frames, reference, title), path)
