"""Figure rendering for the report paths (PNG next to the CSV output)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def save_region_figure(kappa_grid, kappa_prime_grid, region, curve,
                       path: str | Path) -> Path:
    """Admissible (kappa, kappa') region with the numeric boundary curve."""
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    kg = np.asarray(kappa_grid)
    kpg = np.asarray(kappa_prime_grid)
    ax.pcolormesh(kg, kpg, np.asarray(region, dtype=float).T,
                  cmap="Greys", vmin=0.0, vmax=1.6, shading="auto")
    mask = (curve[:, 0] > 0.0) & (curve[:, 0] < 1.0)
    ax.plot(curve[mask, 0], curve[mask, 1], "r-", lw=1.2,
            label=r"$\kappa' = \kappa + 2C_{\kappa'}/\pi$")
    ax.plot([0, 1], [0, 1], "k--", lw=0.8, label=r"$\kappa' = \kappa$")
    ax.set_xlabel(r"$\kappa$")
    ax.set_ylabel(r"$\kappa'$")
    ax.set_xlim(kg.min(), kg.max())
    ax.set_ylim(kpg.min(), kpg.max())
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("admissible region")
    return _save(fig, path)


def save_scott_figure(z_values, residuals, intercept, slope, reference,
                      path: str | Path) -> Path:
    """Z^2-scaled residuals against Z^{-1/3} with the affine fit."""
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    x = np.asarray(z_values, dtype=float) ** (-1.0 / 3.0)
    ax.plot(x, residuals, "o", ms=5, label="sweep")
    xs = np.linspace(0.0, x.max() * 1.05, 50)
    ax.plot(xs, intercept + slope * xs, "-", lw=1.0,
            label=f"fit: {intercept:.4f} + {slope:.3f} x")
    ax.axhline(reference, color="r", ls=":", lw=1.0,
               label=f"level-sum value {reference:.4f}")
    ax.set_xlabel(r"$Z^{-1/3}$")
    ax.set_ylabel(r"$(E - C_{TF} Z^{7/3})/Z^2$")
    ax.legend(fontsize=8)
    return _save(fig, path)


def save_density_figure(grid, rho, phi, path: str | Path,
                        rho_tf=None) -> Path:
    """Radial density (and mean field) of a converged state."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.6, 3.6))
    ax1.loglog(grid.r, np.maximum(4.0 * np.pi * grid.r ** 2 * rho, 1e-300),
               label=r"$4\pi r^2 \rho$")
    if rho_tf is not None:
        ax1.loglog(grid.r, np.maximum(4.0 * np.pi * grid.r ** 2 * rho_tf, 1e-300),
                   "--", label="Thomas-Fermi")
    ax1.set_xlabel("r (a.u.)")
    ax1.set_ylim(bottom=1e-8)
    ax1.legend(fontsize=8)
    ax2.loglog(grid.r, np.maximum(phi, 1e-300))
    ax2.set_xlabel("r (a.u.)")
    ax2.set_ylabel(r"$\varphi(r)$")
    return _save(fig, path)


def save_tf_figure(x, y, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.semilogy(x, np.maximum(y, 1e-300))
    ax.set_xlabel("x")
    ax.set_ylabel("y(x)")
    ax.set_title("universal screening function")
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
