"""Figure rendering for grids, amplitude curves, and filters.

Purely cosmetic layer: every figure mirrors a CSV artifact, never replaces
one.  The Agg backend is forced so rendering works headless.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .quasiprob import QuasiprobGrid

_NEG_CMAP = "RdBu_r"


def plot_grid(g: QuasiprobGrid, path, title: str = "") -> None:
    """Heatmap (cartesian) or radial curve with error band."""
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    if g.geometry == "cartesian":
        vmax = float(np.max(np.abs(g.values))) or 1.0
        mesh = ax.pcolormesh(
            g.re, g.im, g.values, cmap=_NEG_CMAP, vmin=-vmax, vmax=vmax,
            shading="nearest", rasterized=True,
        )
        fig.colorbar(mesh, ax=ax, label="P")
        ax.set_xlabel("Re beta")
        ax.set_ylabel("Im beta")
        ax.set_aspect("equal")
    else:
        ax.axhline(0.0, color="0.6", lw=0.8)
        ax.plot(g.re, g.values, color="C0", lw=1.5)
        if g.stat_err is not None:
            ax.fill_between(
                g.re, g.values - g.stat_err, g.values + g.stat_err,
                alpha=0.3, color="C0", lw=0,
            )
        ax.set_xlabel("|beta|")
        ax.set_ylabel("P")
    src = g.meta.get("source", "")
    ax.set_title(title or f"{src}  (w={g.meta.get('w', '?')})", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_point_curve(
    x, y, yerr, path, xlabel: str, ylabel: str,
    overlay=None, overlay_label: str = "direct", title: str = "",
) -> None:
    """Errorbar curve with an optional exact-reference overlay."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.errorbar(
        x, y, yerr=yerr, fmt="o", ms=4, capsize=2.5, lw=1.0,
        color="C0", label="sampled",
    )
    if overlay is not None:
        ox, oy = overlay
        ax.plot(ox, oy, "-", color="C3", lw=1.3, label=overlay_label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_radial_overlay(grids, labels, path, title: str = "") -> None:
    """Several radial grids on shared axes; sampled ones get error bands."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.axhline(0.0, color="0.6", lw=0.8)
    for k, (g, label) in enumerate(zip(grids, labels)):
        color = f"C{k}"
        ax.plot(g.re, g.values, color=color, lw=1.4, label=label)
        if g.stat_err is not None:
            lo = g.values - g.stat_err
            hi = g.values + g.stat_err
            if g.sys_err is not None:
                lo = lo - g.sys_err
                hi = hi + g.sys_err
            ax.fill_between(g.re, lo, hi, alpha=0.25, color=color, lw=0)
    ax.set_xlabel("|beta|")
    ax.set_ylabel("P")
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_filter(f, path) -> None:
    """Filter profile on [0, b_max] next to its planar Fourier transform."""
    from .filters import filter_fourier, filter_value

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.6, 3.6))
    b = np.linspace(0.0, f.b_max, 400)
    ax1.plot(b, filter_value(f, b), color="C0")
    ax1.set_xlabel("b")
    ax1.set_ylabel("Omega_w(b)")
    ax1.set_title(f"w={f.width:g}, b_max={f.b_max:.3f}", fontsize=9)
    r = np.linspace(0.0, 8.0, 400)
    ax2.axhline(0.0, color="0.6", lw=0.8)
    ax2.plot(r, filter_fourier(f, r), color="C3")
    ax2.set_xlabel("r")
    ax2.set_ylabel("FT of filter")
    ax2.set_title("planar Fourier transform", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
