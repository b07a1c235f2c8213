"""Closed-form hydrogen spectra and the Scott constants of two pictures.

This module works in the scaled convention c = 1 (energies in units of
c^2), where the bound spectrum depends only on the coupling kappa.
Levels are enumerated by principal quantum number n and channel
kappa_j; a full shell n carries total multiplicity 2 n^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import coulomb_channel, diagonalize, free_channel
from .grid import RadialGrid


class SupercriticalLevelError(ValueError):
    """Requested level has kappa_j^2 <= kappa^2 (no regular solution)."""


@dataclass(frozen=True)
class LevelTable:
    """Hydrogen levels (n, kappa_j, energy, multiplicity), energy-sorted."""
    kappa: float
    entries: tuple  # of (n, kappa_j, energy, multiplicity)


@dataclass(frozen=True)
class ScottEstimate:
    kappa: float
    estimate: float
    tail_error: float
    n_max: int
    partial_sum: float


def shell_channels(n: int) -> list[int]:
    """Channels contributing to principal quantum number n."""
    return list(range(-n, 0)) + list(range(1, n))


def dirac_level(kappa: float, n: int, kappa_j: int, scaled: bool = True) -> float:
    """Sommerfeld fine-structure energy of level (n, kappa_j).

    Scaled units: (1 + kappa^2/(n - |kappa_j| + sqrt(kappa_j^2 - kappa^2))^2)^{-1/2}.
    """
    if kappa_j == 0 or abs(kappa_j) > n or n < 1:
        raise ValueError(f"invalid level (n={n}, kappa_j={kappa_j})")
    if not (0.0 <= kappa < 1.0):
        raise ValueError(f"kappa must lie in [0, 1), got {kappa}")
    if kappa_j * kappa_j <= kappa * kappa:
        raise SupercriticalLevelError(
            f"channel kappa_j={kappa_j} supercritical at kappa={kappa}")
    if not scaled:
        raise NotImplementedError("physical units are handled by the caller via c^2 scaling")
    gamma = np.sqrt(kappa_j * kappa_j - kappa * kappa)
    return float((1.0 + (kappa / (n - abs(kappa_j) + gamma)) ** 2) ** -0.5)


def schrodinger_level(kappa: float, n: int) -> float:
    """Rest energy plus the nonrelativistic Coulomb level, 1 - kappa^2/(2 n^2)."""
    if n < 1:
        raise ValueError(f"principal quantum number must be >= 1, got {n}")
    return 1.0 - kappa * kappa / (2.0 * n * n)


def level_table(kappa: float, n_max: int) -> LevelTable:
    entries = []
    for n in range(1, n_max + 1):
        for kj in shell_channels(n):
            entries.append((n, kj, dirac_level(kappa, n, kj), 2 * abs(kj)))
    entries.sort(key=lambda e: e[2])
    return LevelTable(kappa=float(kappa), entries=tuple(entries))


def _shell_difference_sums(kappa: float, n_max: int, levels) -> np.ndarray:
    """Partial sums over shells of the multiplicity-weighted level difference.

    levels(n, kappa_j) supplies the relativistic level; differences are
    against the spin-degenerate Schroedinger level of the same shell.
    """
    partial = np.empty(n_max)
    acc = 0.0
    for n in range(1, n_max + 1):
        lam_s = schrodinger_level(kappa, n)
        acc += sum(2 * abs(kj) * (levels(n, kj) - lam_s) for kj in shell_channels(n))
        partial[n - 1] = acc
    return partial


def _tail_extrapolate(partial: np.ndarray) -> tuple[float, float]:
    """Fit S(n) = S_inf + a/n + b/n^2 + c/n^3 over the tail of the partial sums.

    The shell differences decay like 1/n^2, so the partial sums approach
    their limit with a leading 1/n term; the fit removes it.  Returns
    (S_inf, error estimate from a half-window refit).
    """
    n_max = partial.size
    if n_max < 12:
        raise ValueError(f"need at least 12 shells for tail extrapolation, got {n_max}")

    def fit(lo: int) -> float:
        ns = np.arange(lo, n_max + 1, dtype=float)
        A = np.vstack([np.ones_like(ns), 1.0 / ns, ns ** -2, ns ** -3]).T
        coef, _, rank, _ = np.linalg.lstsq(A, partial[lo - 1:], rcond=None)
        if rank < 4:
            raise RuntimeError("singular design matrix in tail extrapolation")
        return float(coef[0])

    est = fit(max(3, n_max // 10))
    check = fit(max(3, n_max // 5))
    return est, abs(est - check)


def scott_furry(kappa: float, n_max: int = 200) -> ScottEstimate:
    """Scott coefficient of the unprojected picture from the level sum.

    (1/kappa^2) * sum over states of (relativistic - Schroedinger level)
    plus 1/2, with the shell tail extrapolated in 1/n.
    """
    if not (0.0 < kappa < 1.0):
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    partial = _shell_difference_sums(kappa, n_max,
                                     lambda n, kj: dirac_level(kappa, n, kj))
    scaled = partial / kappa ** 2 + 0.5
    est, err = _tail_extrapolate(scaled)
    return ScottEstimate(kappa=float(kappa), estimate=est, tail_error=err,
                         n_max=n_max, partial_sum=float(scaled[-1]))


def br_channel_spectrum(grid: RadialGrid, kappa: float, kappa_j: int) -> np.ndarray:
    """Gap spectrum of the free-projected Coulomb channel (scaled units).

    Builds the free positive projector for the channel and diagonalizes
    the Coulomb channel operator compressed to that subspace; returns
    the eigenvalues inside the gap, ascending.
    """
    if kappa == 0.0:
        return np.array([])
    free = free_channel(grid, kappa_j, 1.0)
    vp = free.eigenvectors[:, free.eigenvalues > 0.0]
    hk = coulomb_channel(grid, kappa_j, 1.0, kappa)
    B = vp.T @ hk.H @ vp
    w = np.linalg.eigvalsh(B)
    return w[(w > 0.0) & (w < 1.0 - 1e-9)]


def scott_br(kappa: float, grid: RadialGrid, n_max: int = 10,
             n_max_furry: int = 200) -> ScottEstimate:
    """Scott coefficient of the free-projected picture.

    Uses the identity C^BR = C^F + (1/kappa^2) sum(lambda^BR - lambda^D)
    with both spectra computed in the same basis so that discretization
    errors cancel in the difference; the difference series gets the same
    1/n tail treatment as the main sum.
    """
    if not (0.0 < kappa < 1.0):
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    br_lv: dict[tuple[int, int], float] = {}
    dirac_lv: dict[tuple[int, int], float] = {}
    for kj in shell_channels(n_max) + [-n_max]:
        n0 = abs(kj) if kj < 0 else kj + 1
        need = n_max - n0 + 1
        if need <= 0:
            continue
        br = br_channel_spectrum(grid, kappa, kj)
        dn = diagonalize(coulomb_channel(grid, kj, 1.0, kappa)).gap_energies()
        if len(br) < need or len(dn) < need:
            raise RuntimeError(
                f"grid resolves only {min(len(br), len(dn))} levels in channel "
                f"kappa_j={kj}, need {need}; enlarge rmax/n")
        for k in range(need):
            br_lv[(n0 + k, kj)] = br[k]
            dirac_lv[(n0 + k, kj)] = dn[k]

    diff_partial = np.empty(n_max)
    acc = 0.0
    for n in range(1, n_max + 1):
        acc += sum(2 * abs(kj) * (br_lv[(n, kj)] - dirac_lv[(n, kj)])
                   for kj in shell_channels(n))
        diff_partial[n - 1] = acc
    diff_scaled = diff_partial / kappa ** 2

    # short difference series: extrapolate with the 1/n model when long
    # enough, otherwise take the plain partial sum with a crude bound
    if n_max >= 12:
        diff_est, diff_err = _tail_extrapolate(diff_scaled)
    else:
        diff_est = float(diff_scaled[-1])
        diff_err = abs(diff_scaled[-1] - diff_scaled[-2])

    furry = scott_furry(kappa, n_max_furry)
    return ScottEstimate(kappa=float(kappa),
                         estimate=furry.estimate + diff_est,
                         tail_error=furry.tail_error + diff_err,
                         n_max=n_max,
                         partial_sum=float(furry.partial_sum + diff_scaled[-1]))
