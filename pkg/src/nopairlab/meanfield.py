"""Densities, shell-theorem Hartree potentials, Coulomb norms, traces.

Occupations are kept per channel and per level with equal weight across
the 2|kappa_j| magnetic substates, which encodes rotation invariance
structurally.  Occupation numbers are exact fractions so that particle
number survives any amount of bookkeeping unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import ChannelSpectrum, channel_abs_p, channel_weight_quarter
from .grid import RadialGrid, cumulative_integral, integrate

# half -> primary interpolation of the small-component density; columns
# sum to one in the interior so electron count is conserved
_G2_COEF = {-1: -1.0 / 16.0, 0: 9.0 / 16.0, 1: 9.0 / 16.0, 2: -1.0 / 16.0}


class GridMismatchError(ValueError):
    """Densities/potentials from different grids may not be combined."""


@dataclass(frozen=True)
class RadialDensity:
    grid: RadialGrid
    rho: np.ndarray      # number density at the primary nodes, >= 0
    total: float         # integral 4 pi r^2 rho dr

    def __post_init__(self):
        self.rho.setflags(write=False)


@dataclass(frozen=True)
class OccupationTable:
    """Entries (kappa_j, gap level index, occupation as exact Fraction)."""
    entries: tuple               # of (int, int, Fraction)
    spectra_key: object = None   # opaque identity of the spectra it indexes

    @property
    def total(self) -> Fraction:
        return sum((e[2] for e in self.entries), Fraction(0))

    def by_channel(self) -> dict[int, list[tuple[int, Fraction]]]:
        out: dict[int, list[tuple[int, Fraction]]] = {}
        for kj, lvl, nu in self.entries:
            out.setdefault(kj, []).append((lvl, nu))
        return out


def _interp_half_density(q_half: np.ndarray) -> np.ndarray:
    """Midpoint interpolation of half-node density samples to primary nodes."""
    n = q_half.size
    out = np.zeros(n)
    idx = np.arange(n)
    for off, c in _G2_COEF.items():
        j = idx + off
        m = (j >= 0) & (j < n)
        out[idx[m]] += c * q_half[j[m]]
    return out


def zero_density(grid: RadialGrid) -> RadialDensity:
    return RadialDensity(grid=grid, rho=np.zeros(grid.n), total=0.0)


def density_from_orbitals(grid: RadialGrid, weighted_vectors) -> RadialDensity:
    """Density from (occupation, flat eigenvector) pairs.

    Each flat vector holds (u, w) with sum u^2 + w^2 = 1; the density of
    one electron in such an orbital is (f^2 + g^2)/(4 pi r^2) with
    f^2(r_i) = u_i^2/(h r_i).  Small components are interpolated from
    the half nodes conservatively, then clipped at zero.
    """
    n = grid.n
    acc_u = np.zeros(n)
    acc_w = np.zeros(n)
    for nu, vec in weighted_vectors:
        nu = float(nu)
        acc_u += nu * vec[:n] ** 2
        acc_w += nu * vec[n:] ** 2
    dens_flat = acc_u + np.maximum(_interp_half_density(acc_w), 0.0)
    rho = dens_flat / (grid.h * grid.r) / (4.0 * np.pi * grid.r ** 2)
    return RadialDensity(grid=grid, rho=rho,
                         total=integrate(grid, 4.0 * np.pi * grid.r ** 2 * rho))


def density_from_occupations(spectra: dict[int, ChannelSpectrum],
                             occ: OccupationTable) -> RadialDensity:
    """Density of an occupation table over per-channel spectra."""
    grid = None
    pairs = []
    for kj, lvl, nu in occ.entries:
        if kj not in spectra:
            raise KeyError(f"occupation references missing channel kappa_j={kj}")
        spec = spectra[kj]
        if grid is None:
            grid = spec.op.grid
        if lvl >= spec.gap_indices.size:
            raise IndexError(
                f"occupation references level {lvl} of channel {kj}, "
                f"which has only {spec.gap_indices.size} gap states")
        pairs.append((nu, spec.eigenvectors[:, spec.gap_indices[lvl]]))
    if grid is None:
        grid = next(iter(spectra.values())).op.grid
    return density_from_orbitals(grid, pairs)


def hartree_potential(rho: RadialDensity) -> np.ndarray:
    """Shell-theorem electrostatic potential of a spherical density.

    phi(r) = Q(r)/r + integral_r^inf 4 pi s rho(s) ds with Q the enclosed
    charge; charge outside the grid is taken as zero.
    """
    grid = rho.grid
    q_in = cumulative_integral(grid, 4.0 * np.pi * grid.r ** 2 * rho.rho)
    s_in = cumulative_integral(grid, 4.0 * np.pi * grid.r * rho.rho)
    return q_in / grid.r + (s_in[-1] - s_in)


def coulomb_energy(rho: RadialDensity) -> float:
    """D[rho] = (1/2) integral phi_rho rho."""
    phi = hartree_potential(rho)
    return 0.5 * integrate(rho.grid, phi * rho.rho * 4.0 * np.pi * rho.grid.r ** 2)


def coulomb_inner(rho1: RadialDensity, rho2: RadialDensity) -> float:
    """Symmetrized Coulomb pairing D(rho1, rho2) = (1/2) int phi_1 rho_2."""
    if rho1.grid.key() != rho2.grid.key():
        raise GridMismatchError("densities live on different grids")
    grid = rho1.grid
    a = integrate(grid, hartree_potential(rho1) * rho2.rho * 4.0 * np.pi * grid.r ** 2)
    b = integrate(grid, hartree_potential(rho2) * rho1.rho * 4.0 * np.pi * grid.r ** 2)
    return 0.25 * (a + b)


def coulomb_norm_signed(grid: RadialGrid, delta_rho: np.ndarray) -> float:
    """D[sigma] for a signed radial density sampled on the grid."""
    sigma = RadialDensity(grid=grid, rho=np.asarray(delta_rho, dtype=float),
                          total=float(integrate(grid, 4.0 * np.pi * grid.r ** 2
                                                * np.asarray(delta_rho))))
    phi = hartree_potential(sigma)
    return 0.5 * integrate(grid, phi * sigma.rho * 4.0 * np.pi * grid.r ** 2)


def radial_expectation(grid: RadialGrid, vec: np.ndarray,
                       m_primary: np.ndarray, m_half: np.ndarray) -> float:
    """<psi| M(r) |psi> for a multiplication operator sampled on both node sets."""
    n = grid.n
    return float(vec[:n] ** 2 @ m_primary + vec[n:] ** 2 @ m_half)


@dataclass(frozen=True)
class TraceRecord:
    kinetic: float        # tr[(D_{c,Z} - c^2) gamma], bare external operator
    inv_r: float          # tr[|.|^{-1} gamma]
    abs_p: float          # tr[|p| gamma]
    number: float         # tr gamma


def trace_diagnostics(spectra: dict[int, ChannelSpectrum], occ: OccupationTable,
                      Z: float, c: float) -> TraceRecord:
    """Single-particle traces of the occupied state against the bare operator.

    The spectra may belong to a mean-field operator; the bare-operator
    trace subtracts the expectation of (V_spectra - (-Z/r)) orbital by
    orbital.
    """
    kin = 0.0
    inv_r = 0.0
    abs_p = 0.0
    num = 0.0
    abs_p_cache: dict[int, np.ndarray] = {}
    for kj, lvl, nu in occ.entries:
        spec = spectra[kj]
        grid = spec.op.grid
        nu = float(nu)
        idx = spec.gap_indices[lvl]
        vec = spec.eigenvectors[:, idx]
        lam = spec.eigenvalues[idx]
        dv_p = spec.op.V - (-Z / grid.r)
        dv_h = spec.op.V_half - (-Z / grid.r_half)
        kin += nu * (lam - c * c - radial_expectation(grid, vec, dv_p, dv_h))
        inv_r += nu * radial_expectation(grid, vec, 1.0 / grid.r, 1.0 / grid.r_half)
        if kj not in abs_p_cache:
            abs_p_cache[kj] = channel_abs_p(grid, kj)
        abs_p += nu * float(vec @ abs_p_cache[kj] @ vec)
        num += nu
    return TraceRecord(kinetic=kin, inv_r=inv_r, abs_p=abs_p, number=num)


# --- X_c norm machinery -------------------------------------------------------

def xc_norm_occupied(spectra: dict[int, ChannelSpectrum], occ: OccupationTable,
                     c: float) -> float:
    """||gamma||_{X_c} of an occupation-diagonal state (positive gamma)."""
    total = 0.0
    for kj, lvl, nu in occ.entries:
        spec = spectra[kj]
        W = channel_weight_quarter(spec.op.grid, kj, c)
        vec = spec.eigenvectors[:, spec.gap_indices[lvl]]
        total += float(nu) * float(np.sum((W @ vec) ** 2))
    return total


def xc_norm_channel_matrix(grid: RadialGrid, kappa_j: int, c: float,
                           M: np.ndarray) -> float:
    """Trace norm of W^{1/4} M W^{1/4} for one channel (per substate).

    Multiply by the channel multiplicity 2|kappa_j| to aggregate.
    """
    W = channel_weight_quarter(grid, kappa_j, c)
    A = W @ M @ W
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (A + A.T)))))
