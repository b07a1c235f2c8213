"""Radial Dirac operators for a single angular channel.

A channel is labelled by the nonzero integer kappa_j with degeneracy
2|kappa_j|.  In the flattened log-grid representation the operator is a
real symmetric 2n x 2n matrix

    H = [ c^2 + V(r)   c K^T      ]
        [ c K         -c^2 + V(r~) ]

where K discretizes d/dr + kappa_j/r mapping the large components
(primary nodes r) to the small components (half nodes r~), and the
(1,2) block is its exact matrix adjoint.  Staggering the two component
grids removes the spurious gap states of equal-order discretizations;
a kinetic-balance ratio filter guards the remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import CubicSpline

from .grid import (RadialGrid, flatten_weight, flatten_weight_half,
                   staggered_derivative, staggered_interp)

# classification codes
SEA, GAP, SCATTERING = -1, 0, 1

BAND_EDGE_RTOL = 1e-9          # lambda >= c^2 (1 - tol) counts as scattering
ZERO_EIGENVALUE_RTOL = 1e-10   # projector guard around 0
KINETIC_BALANCE_RATIO = 10.0   # spurious-state filter threshold


class SupercriticalChannelError(ValueError):
    """Effective Coulomb coupling at or beyond the channel's critical value."""


class IllConditionedProjectionError(RuntimeError):
    """An eigenvalue sits too close to 0 to split the spectrum."""


class ProjectorAccuracyError(RuntimeError):
    """Resolvent quadrature cannot reach the requested tail accuracy."""


@dataclass(frozen=True)
class ChannelOperator:
    grid: RadialGrid
    kappa_j: int
    c: float
    V: np.ndarray          # potential at primary nodes
    V_half: np.ndarray     # potential at half nodes
    H: np.ndarray          # symmetric 2n x 2n
    K: np.ndarray          # flat form of d/dr + kappa_j/r (primary -> half)

    @property
    def n(self) -> int:
        return self.grid.n


@dataclass(frozen=True)
class ChannelSpectrum:
    op: ChannelOperator
    eigenvalues: np.ndarray     # ascending, length 2n (or window size)
    eigenvectors: np.ndarray    # columns, flat-orthonormal; empty if not requested
    classification: np.ndarray  # SEA / GAP / SCATTERING per eigenvalue
    gap_indices: np.ndarray     # retained gap-bound states, ascending energy
    spurious_indices: np.ndarray
    complete: bool = True       # False when only the gap window was computed

    @property
    def kappa_j(self) -> int:
        return self.op.kappa_j

    @property
    def c(self) -> float:
        return self.op.c

    @property
    def multiplicity(self) -> int:
        return 2 * abs(self.op.kappa_j)

    def gap_energies(self) -> np.ndarray:
        return self.eigenvalues[self.gap_indices]


def assemble_channel(grid: RadialGrid, kappa_j: int, c: float,
                     V: np.ndarray, V_half: np.ndarray | None = None) -> ChannelOperator:
    """Assemble the channel matrix for potential samples V at the primary nodes.

    V_half may supply exact half-node samples; otherwise a cubic spline
    in the log coordinate interpolates (adequate for any smooth mean
    field, and edge extrapolation acts only where amplitudes are
    exponentially small).
    """
    if kappa_j == 0:
        raise ValueError("kappa_j must be a nonzero integer")
    if c <= 0.0:
        raise ValueError(f"speed of light must be positive, got {c}")
    V = np.asarray(V, dtype=float)
    if V.shape != (grid.n,):
        raise ValueError(f"potential must have {grid.n} samples, got {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ValueError("potential contains non-finite samples")
    if V_half is None:
        V_half = CubicSpline(grid.t, V)(grid.t - 0.5 * grid.h)
    else:
        V_half = np.asarray(V_half, dtype=float)
        if V_half.shape != (grid.n,):
            raise ValueError("V_half must match the half-node count")

    n = grid.n
    Et = flatten_weight(grid)
    Eh = flatten_weight_half(grid)
    K = (Eh[:, None] * (staggered_derivative(grid) + kappa_j * staggered_interp(grid))) * Et[None, :]

    H = np.zeros((2 * n, 2 * n))
    H[:n, :n] = np.diag(c * c + V)
    H[n:, n:] = np.diag(-c * c + V_half)
    H[:n, n:] = c * K.T
    H[n:, :n] = c * K
    return ChannelOperator(grid=grid, kappa_j=int(kappa_j), c=float(c),
                           V=V, V_half=V_half, H=H, K=K)


def coulomb_channel(grid: RadialGrid, kappa_j: int, c: float, Z: float) -> ChannelOperator:
    """Channel operator for the pure Coulomb potential -Z/r (exact half nodes)."""
    return assemble_channel(grid, kappa_j, c, -Z / grid.r, -Z / grid.r_half)


def _filter_spurious(op: ChannelOperator, w: np.ndarray, v: np.ndarray,
                     gap_mask: np.ndarray) -> np.ndarray:
    """Kinetic-balance ratio test on gap states; returns spurious indices."""
    n = op.n
    bad = []
    for i in np.nonzero(gap_mask)[0]:
        f = v[:n, i]
        g = v[n:, i]
        g_pred = (op.c / (w[i] + op.c ** 2)) * (op.K @ f)
        norm_pred = np.linalg.norm(g_pred)
        norm_g = np.linalg.norm(g)
        if norm_pred == 0.0 or norm_g == 0.0:
            bad.append(i)
            continue
        ratio = norm_g / norm_pred
        if ratio > KINETIC_BALANCE_RATIO or ratio < 1.0 / KINETIC_BALANCE_RATIO:
            bad.append(i)
    return np.array(bad, dtype=int)


def diagonalize(op: ChannelOperator, vectors: bool = True,
                gap_window: bool = False) -> ChannelSpectrum:
    """Symmetric eigendecomposition with band classification.

    gap_window=True computes only the eigenpairs with 0 < lambda below
    the band edge (every gap-bound state, none of the sea/scattering
    basis) - enough for occupation machinery at roughly half the cost.
    Spectral projectors require the complete basis.

    Gap states failing the kinetic-balance ratio test are excluded from
    gap_indices (and thus from occupation machinery) but stay in the
    eigenbasis.
    """
    c2 = op.c ** 2
    try:
        if gap_window:
            w, v = sla.eigh(op.H, driver="evr",
                            subset_by_value=(0.0, c2 * (1.0 - BAND_EDGE_RTOL)))
        elif vectors:
            w, v = sla.eigh(op.H)
        else:
            w = sla.eigh(op.H, eigvals_only=True)
            v = np.empty((2 * op.n, 0))
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise RuntimeError(
            f"eigensolver failed for channel kappa_j={op.kappa_j}: "
            f"dim={2 * op.n}, |H|_max={np.max(np.abs(op.H)):.3e}") from exc

    classification = np.full(w.shape, GAP, dtype=np.int8)
    classification[w < 0.0] = SEA
    classification[w >= c2 * (1.0 - BAND_EDGE_RTOL)] = SCATTERING
    gap_mask = classification == GAP

    if v.shape[1]:
        spurious = _filter_spurious(op, w, v, gap_mask)
    else:
        spurious = np.array([], dtype=int)
    retained = np.setdiff1d(np.nonzero(gap_mask)[0], spurious)
    return ChannelSpectrum(op=op, eigenvalues=w, eigenvectors=v,
                           classification=classification,
                           gap_indices=retained, spurious_indices=spurious,
                           complete=not gap_window)


def positive_projector(spec: ChannelSpectrum) -> np.ndarray:
    """Spectral projector onto the positive subspace, P = sum v v^T."""
    if not spec.complete or spec.eigenvectors.shape[1] != spec.eigenvalues.size:
        raise ValueError("positive_projector needs the complete eigenbasis")
    w = spec.eigenvalues
    guard = ZERO_EIGENVALUE_RTOL * spec.c ** 2
    if np.min(np.abs(w)) < guard:
        raise IllConditionedProjectionError(
            f"eigenvalue within {guard:.3e} of zero "
            f"(min |lambda| = {np.min(np.abs(w)):.3e})")
    vp = spec.eigenvectors[:, w > 0.0]
    return vp @ vp.T


def resolvent_projector(op: ChannelOperator, z_max: float | None = None,
                        n_quad: int = 400, tail_tol: float = 1e-9) -> np.ndarray:
    """Positive projector via the resolvent integral 1/2 + (1/2pi) int (H+iz)^{-1} dz.

    Symmetrized form: P = 1/2 + (1/pi) int_0^inf H (H^2 + z^2)^{-1} dz,
    evaluated by Gauss-Legendre after z = s tan(theta) with the analytic
    arctan tail series beyond z_max.  Independent of any eigensolver;
    used to cross-validate positive_projector.
    """
    H = op.H
    norm_bound = float(np.max(np.sum(np.abs(H), axis=1)))  # Gershgorin 2-norm bound
    if z_max is None:
        z_max = 8.0 * norm_bound
    ratio = norm_bound / z_max
    # tail series arctan(H/z) truncated after the H^7 term
    tail_err = ratio ** 9 / (9.0 * np.pi)
    if tail_err > tail_tol:
        raise ProjectorAccuracyError(
            f"tail estimate {tail_err:.3e} exceeds {tail_tol:.1e}; "
            f"increase z_max (currently {z_max:.3e}, |H| <= {norm_bound:.3e})")

    gap_scale = op.c ** 2
    s = np.sqrt(gap_scale * norm_bound)   # geometric mean of spectral extremes
    theta_max = np.arctan(z_max / s)
    x, wq = np.polynomial.legendre.leggauss(n_quad)
    theta = 0.5 * theta_max * (x + 1.0)
    wq = wq * 0.5 * theta_max

    dim = H.shape[0]
    H2 = H @ H
    acc = np.zeros_like(H)
    for th, wt in zip(theta, wq):
        z = s * np.tan(th)
        jac = s / np.cos(th) ** 2
        acc += (wt * jac) * sla.solve(H2 + z * z * np.eye(dim), H,
                                      assume_a="pos")
    # arctan(H/z_max) = H/z_max - H^3/(3 z_max^3) + H^5/(5 z_max^5) - ...
    X = H / z_max
    X2 = X @ X
    tail = X @ (np.eye(dim) - X2 @ (np.eye(dim) / 3.0 - X2 @ (np.eye(dim) / 5.0 - X2 / 7.0)))
    return 0.5 * np.eye(dim) + (acc + tail) / np.pi


def operator_order(A: np.ndarray, B: np.ndarray) -> float:
    """Smallest eigenvalue of B - A; >= -tol certifies A <= B in the basis."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return float(sla.eigvalsh(B - A)[0])


BAND_CUT_DEFAULT = 100.0  # |lambda| <= cut * c^2 defines the certified band


def band_projector(spec: ChannelSpectrum, band_cut: float = BAND_CUT_DEFAULT) -> np.ndarray:
    """Columns spanning the eigenstates with |lambda| <= band_cut * c^2.

    Modes beyond ~1e4 c^2 are sub-grid boundary artifacts of the
    truncated stencils (they violate relative operator bounds that hold
    for every continuum state); certificates are evaluated on the band.
    """
    if not spec.complete:
        raise ValueError("band_projector needs the complete eigenbasis")
    mask = np.abs(spec.eigenvalues) <= band_cut * spec.c ** 2
    return spec.eigenvectors[:, mask]


def banded_operator_order(A: np.ndarray, B: np.ndarray, basis: np.ndarray) -> float:
    """operator_order compressed to the given band subspace."""
    return operator_order(basis.T @ A @ basis, basis.T @ B @ basis)


# --- per-channel kinetic machinery (|p|, fractional weights) -----------------

_KINETIC_CACHE: dict = {}
_WEIGHT_CACHE: dict = {}
_FREE_CACHE: dict = {}


def channel_kinetic_eig(grid: RadialGrid, kappa_j: int):
    """Eigendecompositions of the channel p^2 blocks (f and g components).

    p^2 acts blockwise as -d^2/dr^2 + l(l+1)/r^2 with l(l+1) equal to
    kappa_j (kappa_j + 1) on the large and kappa_j (kappa_j - 1) on the
    small component; -d^2/dr^2 is realized PSD as G^T G from the same
    staggered first-derivative stencils.
    """
    key = (grid.key(), int(kappa_j))
    hit = _KINETIC_CACHE.get(key)
    if hit is not None:
        return hit
    Et = flatten_weight(grid)
    Eh = flatten_weight_half(grid)
    G = (Eh[:, None] * staggered_derivative(grid)) * Et[None, :]
    p2_f = G.T @ G + np.diag(kappa_j * (kappa_j + 1) / grid.r ** 2)
    p2_g = G @ G.T + np.diag(kappa_j * (kappa_j - 1) / grid.r_half ** 2)
    wf, uf = sla.eigh(p2_f)
    wg, ug = sla.eigh(p2_g)
    # clip tiny negative rounding of the PSD forms
    out = ((np.maximum(wf, 0.0), uf), (np.maximum(wg, 0.0), ug))
    _KINETIC_CACHE[key] = out
    return out


def channel_weight_quarter(grid: RadialGrid, kappa_j: int, c: float) -> np.ndarray:
    """Block-diagonal (c^4 + c^2 p^2)^{1/4} for the X_c norm, 2n x 2n."""
    key = (grid.key(), int(kappa_j), float(c))
    hit = _WEIGHT_CACHE.get(key)
    if hit is not None:
        return hit
    (wf, uf), (wg, ug) = channel_kinetic_eig(grid, kappa_j)
    qf = (uf * (c ** 4 + c ** 2 * wf) ** 0.25) @ uf.T
    qg = (ug * (c ** 4 + c ** 2 * wg) ** 0.25) @ ug.T
    W = np.zeros((2 * grid.n, 2 * grid.n))
    W[:grid.n, :grid.n] = qf
    W[grid.n:, grid.n:] = qg
    _WEIGHT_CACHE[key] = W
    return W


def channel_abs_p(grid: RadialGrid, kappa_j: int) -> np.ndarray:
    """Block-diagonal |p| = sqrt(p^2) for the channel, 2n x 2n."""
    (wf, uf), (wg, ug) = channel_kinetic_eig(grid, kappa_j)
    W = np.zeros((2 * grid.n, 2 * grid.n))
    W[:grid.n, :grid.n] = (uf * np.sqrt(wf)) @ uf.T
    W[grid.n:, grid.n:] = (ug * np.sqrt(wg)) @ ug.T
    return W


def free_channel(grid: RadialGrid, kappa_j: int, c: float) -> ChannelSpectrum:
    """Cached spectrum of the free channel operator (V = 0)."""
    key = (grid.key(), int(kappa_j), float(c))
    hit = _FREE_CACHE.get(key)
    if hit is None:
        hit = diagonalize(assemble_channel(grid, kappa_j, c,
                                           np.zeros(grid.n), np.zeros(grid.n)))
        _FREE_CACHE[key] = hit
    return hit


def spectrum_power(spec: ChannelSpectrum, p: float) -> np.ndarray:
    """|H|^p from an eigendecomposition, |H|^p = V |lambda|^p V^T."""
    if not spec.complete or spec.eigenvectors.shape[1] != spec.eigenvalues.size:
        raise ValueError("spectrum_power needs the complete eigenbasis")
    v = spec.eigenvectors
    return (v * np.abs(spec.eigenvalues) ** p) @ v.T
