"""Closed-form coupling constants and the numeric admissibility region.

All quantities are dimensionless functions of the coupling kappa = Z/c.
The lower operator-equivalence constant C_kappa comes with the companion
upper factor 1 + 2*kappa; the exclusion constant assembles the
Hardy-Littlewood-Sobolev and Daubechies constants with two externally
supplied constants whose exact values are only defined by reference in
the literature (defaults documented below, flagged as approximations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT3_HALF = np.sqrt(3.0) / 2.0
# branch window around kappa = sqrt(3)/2 where the generic eta formula is 0/0
ETA_BRANCH_WINDOW = 1e-8

C_HLS = (256.0 / (27.0 * np.pi)) ** (1.0 / 3.0)   # Hardy-Littlewood-Sobolev
C_DAUB = 1.63 / 4.0 ** (1.0 / 3.0)                # Daubechies lower bound


@dataclass(frozen=True)
class KappaConstants:
    kappa: float
    upsilon: float    # sqrt(1 - kappa^2)
    eta: float
    d: float
    c_lower: float    # C_kappa, lower equivalence constant
    upper: float      # 1 + 2*kappa, upper equivalence factor


@dataclass(frozen=True)
class ExclusionConstants:
    kappa: float
    c_hls: float
    c_d: float
    c_prime: float    # supplied; default C_kappa (approximation)
    c_ret: float      # supplied; default 1.0 (approximation)
    c_ex: float
    approximate_inputs: bool = True


def _eta(kappa: float, upsilon: float) -> float:
    if abs(kappa - SQRT3_HALF) < ETA_BRANCH_WINDOW:
        return 1.0 / (np.sqrt(3.0) * (np.pi - 2.0))
    num = np.sqrt(9.0 + 4.0 * kappa * kappa) - 4.0 * kappa
    den = 3.0 * (1.0 - 2.0 * upsilon / np.tan(np.pi * upsilon / 2.0))
    return num / den


def kappa_constants(kappa: float) -> KappaConstants:
    """Evaluate the closed-form constants at a coupling kappa in [0, 1)."""
    if not (0.0 <= kappa < 1.0):
        raise ValueError(f"kappa must lie in [0, 1), got {kappa}")
    upsilon = np.sqrt(1.0 - kappa * kappa)
    eta = _eta(kappa, upsilon)
    # cot(pi*upsilon/2) is finite on (0, 1]; upsilon = 1 gives cot(pi/2) = 0
    d = (1.0 - np.pi * upsilon / np.tan(np.pi * upsilon / 2.0) / 2.0) * eta
    c_lower = max(d * upsilon / (1.0 + d), 1.0 - 2.0 * kappa)
    return KappaConstants(kappa=float(kappa), upsilon=float(upsilon),
                          eta=float(eta), d=float(d),
                          c_lower=float(c_lower), upper=float(1.0 + 2.0 * kappa))


def exclusion_constant(kappa: float, c_prime: float, c_ret: float) -> ExclusionConstants:
    """Assemble the exclusion constant 8k * max{k^2 (HLS/(C' D))^3, 8 (ret/C')^6}."""
    if not (0.0 < kappa < 1.0):
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    if c_prime <= 0.0 or c_ret <= 0.0:
        raise ValueError("c_prime and c_ret must be positive")
    branch_hls = kappa * kappa * (C_HLS / (c_prime * C_DAUB)) ** 3
    branch_ret = 8.0 * (c_ret / c_prime) ** 6
    c_ex = 8.0 * kappa * max(branch_hls, branch_ret)
    return ExclusionConstants(kappa=float(kappa), c_hls=C_HLS, c_d=C_DAUB,
                              c_prime=float(c_prime), c_ret=float(c_ret),
                              c_ex=float(c_ex))


def default_exclusion_constant(kappa: float) -> ExclusionConstants:
    """Exclusion constant with the documented default inputs.

    C' defaults to C_kappa and C^ret to 1; both are stand-ins for
    constants the literature defines only implicitly, so any derived
    threshold is an approximation.
    """
    return exclusion_constant(kappa, kappa_constants(kappa).c_lower, 1.0)


def c_lower_grid(kappas: np.ndarray) -> np.ndarray:
    """Vectorized C_kappa; sign of the coupling is immaterial."""
    kappas = np.abs(np.asarray(kappas, dtype=float))
    if np.any(kappas >= 1.0):
        raise ValueError("couplings must satisfy |kappa| < 1")
    return np.array([kappa_constants(k).c_lower for k in kappas])


def boundary_curve(kappa_prime_grid: np.ndarray) -> np.ndarray:
    """Admissibility boundary kappa(kappa') = kappa' - 2 C_{kappa'} / pi.

    Returns a (m, 2) array of (kappa, kappa') pairs; the curve is the
    zero set of kappa' - kappa - 2 C_{kappa'}/pi in the region
    kappa' > kappa.
    """
    kp = np.asarray(kappa_prime_grid, dtype=float)
    kb = kp - 2.0 * c_lower_grid(kp) / np.pi
    return np.column_stack([kb, kp])


def admissible_region(kappa_grid, kappa_prime_grid):
    """Boolean admissibility matrix over a (kappa, kappa') grid.

    Cell (i, j) is admissible when kappa'_j <= kappa_i (base region) or
    when the numeric criterion kappa'_j < kappa_i + 2 C_{kappa'_j}/pi
    holds.  Also returns the boundary curve of the numeric criterion.
    """
    kg = np.asarray(kappa_grid, dtype=float)
    kpg = np.asarray(kappa_prime_grid, dtype=float)
    if kg.size == 0 or kpg.size == 0:
        raise ValueError("empty admissibility grids")
    if np.any((kg <= 0.0) | (kg >= 1.0)):
        raise ValueError("kappa grid must lie in (0, 1)")
    if np.any((kpg <= -1.0) | (kpg >= 1.0)):
        raise ValueError("kappa' grid must lie in (-1, 1)")
    c_kp = c_lower_grid(kpg)
    base = kpg[None, :] <= kg[:, None]
    numeric = kpg[None, :] < kg[:, None] + 2.0 * c_kp[None, :] / np.pi
    return base | numeric, boundary_curve(kpg)
