"""SVG figures for the report path (Agg backend, no display needed)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .report import atomic_write  # noqa: E402

# fixed ids and no timestamp keep reruns byte-identical
matplotlib.rcParams["svg.hashsalt"] = "relosc"
matplotlib.rcParams["svg.fonttype"] = "none"


def _save(fig, path: Path):
    import io

    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    atomic_write(path, buf.getvalue())
    return Path(path)


def plot_series(s, path):
    """Width corrections and the relative product shift against omega t."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5.5), sharex=True)
    x = s.omega_t
    ax1.plot(x, s.corr_q2 / s.sigma_q2_nr, label=r"$\delta\sigma_q^2/\sigma_q^2$")
    ax1.plot(x, s.corr_p2 / s.sigma_p2_nr, label=r"$\delta\sigma_p^2/\sigma_p^2$")
    ax1.set_ylabel("relative variance shift")
    ax1.legend(loc="best", fontsize=8)
    ax2.plot(x, s.corr_product / s.product_nr, color="k")
    ax2.set_ylabel("relative product shift")
    ax2.set_xlabel(r"$\omega t$")
    fig.tight_layout()
    return _save(fig, path)


def plot_scaling(sc, path):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(sc.omega_t, sc.f1, label="$f_1$")
    ax.plot(sc.omega_t, sc.f2, label="$f_2$")
    ax.axhline(0, color="0.7", lw=0.5)
    ax.set_xlabel(r"$\omega t$")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_coeffs(columns, rows, path):
    rows = np.asarray(rows)
    x = rows[:, 0]
    fig, axes = plt.subplots(2, 4, figsize=(11, 5), sharex=True)
    for k, ax in enumerate(axes.flat):
        name = columns[1 + k].split("_")[0]
        ax.plot(x, rows[:, 9 + k], label="oracle")
        ax.plot(x, rows[:, 1 + k], "--", label="printed")
        ax.set_title(name, fontsize=9)
    axes[0, 0].legend(fontsize=7)
    for ax in axes[1]:
        ax.set_xlabel(r"$\omega t$")
    fig.tight_layout()
    return _save(fig, path)


def plot_sweep(rows, path):
    rows = np.asarray(rows, dtype=float)
    eta = rows[:, 1]
    keep = eta > 0
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(eta[keep], np.maximum(rows[keep, 4], 1e-300), "o-", label="max rel width shift")
    prod = rows[keep, 5]
    if np.any(prod > 0):
        ax.loglog(eta[keep][prod > 0], prod[prod > 0], "s-", label="max rel product shift")
    ax.set_xlabel(r"$\eta_E$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_richardson(x, tables, path):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for tab in tables:
        r = np.where(tab.mask, tab.ratio, np.nan)
        ax.plot(x, r, ".", ms=2, label=tab.quantity)
    ax.axhspan(0.2, 0.3, color="0.9")
    ax.set_ylim(-0.5, 1.0)
    ax.set_xlabel(r"$\omega t$")
    ax.set_ylabel(r"$R(\varepsilon/2)/R(\varepsilon)$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
