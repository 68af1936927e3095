"""Figure rendering for the CLI report paths.

Each function draws one figure and writes it next to the CSV output it
illustrates. Rendering is headless (Agg) and timestamp-free so repeated
runs produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_eigenenergy_figure",
    "save_dynamics_figure",
    "save_transmission_figure",
    "save_sensitivity_figure",
    "save_fit_figure",
]

_SAVE_KW = dict(dpi=150, bbox_inches="tight")


def _finish(fig, path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_eigenenergy_figure(path, g_tilde, eps1, eps2, gamma):
    """Real and imaginary eigenenergy branches across the EP (matrix view)."""
    fig, (ax_re, ax_im) = plt.subplots(1, 2, figsize=(8.5, 3.4))
    for eps, label in ((eps1, r"$\varepsilon_1$"), (eps2, r"$\varepsilon_2$")):
        ax_re.plot(g_tilde, np.real(eps) / gamma, label=label)
        ax_im.plot(g_tilde, np.imag(eps) / gamma, label=label)
    for ax, ylabel in ((ax_re, r"Re $\varepsilon$ / $\gamma$"), (ax_im, r"Im $\varepsilon$ / $\gamma$")):
        ax.axvline(1.0, color="0.7", lw=0.8, zorder=0)
        ax.set_xlabel(r"relative coupling $\tilde{g}$")
        ax.set_ylabel(ylabel)
        ax.legend(frameon=False)
    _finish(fig, path)


def save_dynamics_figure(path, times, g_tilde, population, coherence):
    """Population and coherence maps versus time and relative coupling."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4), sharey=True)
    extent = [times[0] * 1e9, times[-1] * 1e9, g_tilde[0], g_tilde[-1]]
    for ax, mat, title in (
        (axes[0], population, r"$P_e^1(t)$"),
        (axes[1], coherence, r"$|\langle\sigma_2^-(t)\rangle|$"),
    ):
        im = ax.imshow(mat, aspect="auto", origin="lower", extent=extent, cmap="viridis")
        ax.axhline(1.0, color="w", lw=0.8, ls="--")
        ax.set_xlabel("time (ns)")
        ax.set_title(title)
        fig.colorbar(im, ax=ax)
    axes[0].set_ylabel(r"$\tilde{g}$")
    _finish(fig, path)


def save_transmission_figure(path, detunings, g_tilde, magnitudes):
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    extent = [
        detunings[0] / (2 * np.pi * 1e6),
        detunings[-1] / (2 * np.pi * 1e6),
        g_tilde[0],
        g_tilde[-1],
    ]
    im = ax.imshow(magnitudes, aspect="auto", origin="lower", extent=extent,
                   cmap="viridis", vmin=0.0, vmax=1.0)
    ax.axhline(1.0, color="w", lw=0.8, ls="--")
    ax.set_xlabel(r"probe detuning $\delta_p/2\pi$ (MHz)")
    ax.set_ylabel(r"$\tilde{g}$")
    ax.set_title(r"$|S_{21}|$")
    fig.colorbar(im, ax=ax)
    _finish(fig, path)


def save_sensitivity_figure(path, curve, title: str):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(curve.g_tilde, curve.normalized(), marker="o", ms=2.5)
    ax.axvline(1.0, color="0.7", lw=0.8, zorder=0)
    ax.set_xlabel(r"relative coupling $\tilde{g}$")
    ax.set_ylabel(r"normalized sensitivity $\eta$")
    ax.set_title(title)
    _finish(fig, path)


def save_fit_figure(path, g_tilde_true, g_tilde_hat):
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    lim = [0.0, max(np.max(g_tilde_true), np.max(g_tilde_hat)) * 1.05]
    ax.plot(lim, lim, color="0.7", lw=0.8)
    ax.plot(g_tilde_true, g_tilde_hat, "o", ms=3)
    ax.set_xlabel(r"true $\tilde{g}$")
    ax.set_ylabel(r"fitted $\tilde{g}$")
    ax.set_xlim(lim)
    ax.set_ylim(lim)
    _finish(fig, path)
