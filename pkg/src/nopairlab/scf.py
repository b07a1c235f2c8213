"""Self-consistent no-pair Dirac-Hartree minimization with the (1 - 1/N)
self-interaction correction.

The driver iterates density -> mean-field channel operators ->
eigendecomposition -> occupation by ascending energy -> new density,
with linear density mixing.  Occupations are exact fractions; the
threshold level may be fractionally filled, split over the degenerate
group proportionally to multiplicity.  The retraction map (project the
state with the positive projector of its own mean field) and its
iterated limit quantify how close a state is to the self-consistency
constraint; the converged solver state is also verified against the
aufbau/Euler structure.

Physical Hartree units: the speed of light is c = Z/kappa; energies
E^S are reported relative to the electron rest energy.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .channel import (ChannelOperator, ChannelSpectrum, assemble_channel,
                      diagonalize, operator_order, positive_projector)
from .grid import RadialGrid, make_log_grid
from .meanfield import (OccupationTable, RadialDensity, coulomb_energy,
                        coulomb_norm_signed, density_from_occupations,
                        hartree_potential, radial_expectation,
                        xc_norm_channel_matrix, zero_density)
from .thomasfermi import tf_density

DEGENERACY_RTOL = 1e-9    # levels within this * c^2 share the threshold filling


class ChannelCutoffError(RuntimeError):
    """Occupations reached the sentinel channel |kappa_j| = K_max."""


class BasisSizeError(RuntimeError):
    """Too few gap-bound levels to hold the requested electron count."""


class ContractionError(RuntimeError):
    """Retraction iteration fails to contract."""


class SCFNonConvergence(RuntimeError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass(frozen=True)
class SCFConfig:
    N: int
    Z: float
    kappa: float = 0.5
    k_max: int | None = None       # sentinel channel; occupied |kappa_j| must stay below
    rmin: float | None = None      # default 1e-6 / Z
    rmax: float | None = None      # default 60/Z * max(1, N^{1/3})
    n_grid: int = 500
    alpha: float = 0.3             # linear density mixing
    tol_energy: float = 1e-9       # relative energy change
    tol_density: float = 1e-6      # relative Coulomb norm of the density residual
    max_iter: int = 200
    init: str = "hydrogenic"       # "hydrogenic" (rho = 0 seed) or "tf"
    occ_damping: str = "auto"      # "auto" | "off": inertia against occupation flips
    uniqueness_probe: bool = False
    verbose: bool = False

    def __post_init__(self):
        if not (1 <= self.N <= self.Z + 1e-12):
            raise ValueError(f"need 1 <= N <= Z, got N={self.N}, Z={self.Z}")
        if not (0.0 < self.kappa < 1.0):
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"mixing alpha must lie in (0, 1], got {self.alpha}")

    @property
    def c(self) -> float:
        return self.Z / self.kappa

    def resolved_k_max(self) -> int:
        if self.k_max is not None:
            return self.k_max
        n_shell, cap = 1, 2
        while cap < self.N:
            n_shell += 1
            cap += 2 * n_shell * n_shell
        return n_shell + 1

    def channels(self) -> list[int]:
        k = self.resolved_k_max()
        return [kj for kj in range(-k, k + 1) if kj != 0]

    def build_grid(self) -> RadialGrid:
        rmin = self.rmin if self.rmin is not None else 1e-6 / self.Z
        rmax = self.rmax if self.rmax is not None else \
            60.0 / self.Z * max(1.0, self.N ** (1.0 / 3.0))
        return make_log_grid(rmin, rmax, self.n_grid)


@dataclass
class SCFState:
    config: SCFConfig
    grid: RadialGrid
    spectra: dict[int, ChannelSpectrum]
    occupations: OccupationTable
    rho: RadialDensity
    phi_star: np.ndarray               # (1 - 1/N) * hartree(rho), primary nodes
    fermi_level: float
    energies: dict[str, float]
    residuals: dict[str, float]
    iterations: int
    converged: bool
    history: list[dict] = field(default_factory=list)
    uniqueness: dict | None = None


@dataclass(frozen=True)
class EulerReport:
    retraction_defect: float
    state_norm_xc: float
    aufbau_violations: int
    fermi_level: float
    fermi_band: tuple[float, float]
    fermi_in_band: bool
    trace_defect: float
    boundedness_slack: float            # min eig of c^2 - Pperp D_{c,Z} Pperp, over channels

    @property
    def relative_defect(self) -> float:
        return self.retraction_defect / self.state_norm_xc


def mean_field_operator(rho: RadialDensity, cfg: SCFConfig,
                        grid: RadialGrid | None = None) -> dict[int, ChannelOperator]:
    """Per-channel operators for V = -Z/r + (1 - 1/N) * phi_rho."""
    grid = grid or rho.grid
    if rho.total > cfg.N * (1.0 + 1e-8):
        raise ValueError(f"density integrates to {rho.total}, above N={cfg.N}")
    supercritical = [kj for kj in cfg.channels() if kj * kj <= cfg.kappa ** 2]
    if supercritical:
        raise ValueError(f"supercritical channels excluded: {supercritical}")
    fa = 1.0 - 1.0 / cfg.N
    c = cfg.c
    if fa == 0.0 or rho.total == 0.0:
        v = -cfg.Z / grid.r
        v_half = -cfg.Z / grid.r_half
    else:
        from scipy.interpolate import CubicSpline
        phi = hartree_potential(rho)
        phi_half = CubicSpline(grid.t, phi)(grid.t - 0.5 * grid.h)
        v = -cfg.Z / grid.r + fa * phi
        v_half = -cfg.Z / grid.r_half + fa * phi_half
    return {kj: assemble_channel(grid, kj, c, v, v_half) for kj in cfg.channels()}


def _diagonalize_all(ops: dict[int, ChannelOperator],
                     gap_window: bool = False) -> dict[int, ChannelSpectrum]:
    return {kj: diagonalize(op, gap_window=gap_window) for kj, op in ops.items()}


def aufbau(spectra: dict[int, ChannelSpectrum], N,
           c: float | None = None) -> tuple[OccupationTable, float]:
    """Fill gap-bound levels in ascending energy with exact fractions.

    Levels within DEGENERACY_RTOL * c^2 of each other form one group;
    a partially filled group splits its occupancy proportionally to the
    channel multiplicities, realizing the threshold operator with equal
    magnetic weights.  Returns the table and the Fermi level (energy of
    the last group touched).
    """
    if c is None:
        c = next(iter(spectra.values())).c
    levels = []
    for kj, spec in spectra.items():
        for lvl, e in enumerate(spec.gap_energies()):
            levels.append((float(e), kj, lvl, 2 * abs(kj)))
    levels.sort()
    N = Fraction(N)
    if N < 0:
        raise ValueError("electron count must be nonnegative")
    capacity = sum(m for *_, m in levels)
    if N > capacity:
        raise BasisSizeError(
            f"{float(N)} electrons exceed the {capacity} gap-bound slots; "
            "enlarge the grid or K_max")

    tol = DEGENERACY_RTOL * c * c
    entries = []
    remaining = N
    fermi = -math.inf
    i = 0
    while remaining > 0 and i < len(levels):
        j = i
        while j < len(levels) and levels[j][0] - levels[i][0] <= tol:
            j += 1
        group = levels[i:j]
        cap = sum(m for *_, m in group)
        fermi = group[0][0]
        if remaining >= cap:
            entries.extend((kj, lvl, Fraction(m)) for _, kj, lvl, m in group)
            remaining -= cap
        else:
            for _, kj, lvl, m in group:
                entries.append((kj, lvl, remaining * m / cap))
            remaining = Fraction(0)
        i = j
    occ = OccupationTable(entries=tuple(entries))
    assert occ.total == N
    occ_fermi = float(fermi)
    k_sentinel = max(abs(kj) for kj in spectra)
    if any(abs(kj) == k_sentinel for kj, _, nu in entries if nu > 0) and len(spectra) > 2:
        raise ChannelCutoffError(
            f"occupations reached the sentinel channel |kappa_j| = {k_sentinel}; "
            "increase K_max")
    return occ, occ_fermi


def _energy_terms(spectra, occ, rho_out, cfg) -> dict[str, float]:
    """Energy components from per-orbital traces against the bare operator."""
    c2 = cfg.c ** 2
    trace_term = 0.0
    for kj, lvl, nu in occ.entries:
        spec = spectra[kj]
        op = spec.op
        grid = op.grid
        idx = spec.gap_indices[lvl]
        vec = spec.eigenvectors[:, idx]
        dv_p = op.V + cfg.Z / grid.r
        dv_h = op.V_half + cfg.Z / grid.r_half
        trace_term += float(nu) * (spec.eigenvalues[idx] - c2
                                   - radial_expectation(grid, vec, dv_p, dv_h))
    dcoul = coulomb_energy(rho_out)
    fa = 1.0 - 1.0 / cfg.N
    e_ha = trace_term + fa * dcoul
    return {"E_S": e_ha, "E_HA": e_ha, "E_H": trace_term + dcoul,
            "trace_term": trace_term, "coulomb": dcoul}


def energy(state: SCFState) -> dict[str, float]:
    """Energy record of a state; E_H - E_HA = D[rho]/N identically."""
    return _energy_terms(state.spectra, state.occupations, state.rho, state.config)


def scf_solve(cfg: SCFConfig) -> SCFState:
    """Damped fixed-point loop over the density.

    Converged when the relative energy change and the relative Coulomb
    norm of the density residual both fall below their tolerances.
    Raises SCFNonConvergence (with the iteration history) otherwise.
    """
    grid = cfg.build_grid()
    state = _scf_run(cfg, grid, cfg.init)
    if cfg.uniqueness_probe:
        alt = "tf" if cfg.init != "tf" else "hydrogenic"
        other = _scf_run(cfg, grid, alt)
        gap = abs(other.energies["E_S"] - state.energies["E_S"])
        state.uniqueness = {
            "restart_init": alt,
            "restart_energy": other.energies["E_S"],
            "energy_gap": gap,
            "distinct_minimizer_flag": bool(
                gap > cfg.tol_energy * max(1.0, abs(state.energies["E_S"])) * 10.0),
        }
    return state


def _occ_map(occ: OccupationTable) -> dict:
    return {(kj, lvl): nu for kj, lvl, nu in occ.entries}


def _occ_distance(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return float(sum(abs(float(a.get(k, 0)) - float(b.get(k, 0))) for k in keys))


def _carry_occupations(prev: dict, spectra) -> tuple[OccupationTable, float]:
    """Re-anchor an occupation map onto freshly computed spectra."""
    entries = []
    fermi = -math.inf
    for (kj, lvl) in sorted(prev):
        nu = prev[(kj, lvl)]
        if nu == 0:
            continue
        spec = spectra[kj]
        if lvl >= spec.gap_indices.size:
            raise BasisSizeError(
                f"level ({kj},{lvl}) vanished from the gap during occupation carry")
        entries.append((kj, lvl, nu))
        fermi = max(fermi, float(spec.gap_energies()[lvl]))
    return OccupationTable(entries=tuple(entries)), fermi


def fermi_occupations(spectra: dict[int, ChannelSpectrum], N, T: float,
                      c: float) -> tuple[OccupationTable, float]:
    """Fermi-Dirac occupations at smearing temperature T.

    Used as a numerical continuation when lowest-first filling limit
    cycles on a frontier crossing: the smeared map is continuous, and
    annealing T toward zero recovers the sharp threshold structure with
    the pinned group's fractions set by the degeneracy condition rather
    than by fiat.  The chemical potential is bisected to the electron
    count, then occupancies are rescaled to the exact total.
    """
    from scipy.special import expit
    levels = []
    for kj, spec in spectra.items():
        for lvl, e in enumerate(spec.gap_energies()):
            levels.append((float(e), kj, lvl, 2 * abs(kj)))
    if not levels:
        raise BasisSizeError("no gap-bound levels to occupy")
    e = np.array([l[0] for l in levels])
    mult = np.array([l[3] for l in levels], dtype=float)
    target = float(N)
    if target > mult.sum():
        raise BasisSizeError(f"{target} electrons exceed {mult.sum()} slots")

    def count(mu):
        return float(mult @ expit(-(e - mu) / T))

    lo, hi = e.min() - 60.0 * T, e.max() + 60.0 * T
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if count(mid) < target:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    nu = mult * expit(-(e - mu) / T)
    total = nu.sum()
    if total > 0:
        nu = nu * (target / total)
    entries = []
    fermi = -math.inf
    for (ei, kj, lvl, m), v in zip(levels, nu):
        if v < 1e-14:
            continue
        entries.append((kj, lvl, Fraction(float(min(v, m)))))
        fermi = max(fermi, ei)
    occ = OccupationTable(entries=tuple(entries))
    # exact-count bookkeeping: absorb the rescale remainder in the top level
    defect = Fraction(int(N)) - occ.total
    if defect != 0 and entries:
        kj, lvl, v = occ.entries[-1]
        entries = list(occ.entries)
        entries[-1] = (kj, lvl, v + defect)
        occ = OccupationTable(entries=tuple(entries))
    return occ, fermi


def _initial_density(cfg: SCFConfig, grid: RadialGrid) -> RadialDensity:
    if cfg.init == "hydrogenic":
        return zero_density(grid)
    if cfg.init == "tf":
        rho = tf_density(cfg.Z, grid)
        if cfg.N != cfg.Z or rho.total > cfg.N:
            scale = min(1.0, cfg.N / rho.total)
            rho = RadialDensity(grid=grid, rho=rho.rho * scale,
                                total=rho.total * scale)
        return rho
    raise ValueError(f"unknown initial density '{cfg.init}'")


def _scf_run(cfg: SCFConfig, grid: RadialGrid, init: str) -> SCFState:
    rho_in = _initial_density(replace(cfg, init=init), grid)
    history = []
    e_prev = None
    rho_scale = None
    occ_trail: list[dict] = []
    smear_T = None                  # None = plain lowest-first filling
    smear_T0 = math.inf
    t_floor = 1e-7 * cfg.c ** 2
    resid_at_cool = math.inf
    cool_stall = 0
    # with the self-interaction factor zero the potential never moves;
    # undamped iteration is then exact at the second step
    alpha = 1.0 if cfg.N == 1 else cfg.alpha
    for it in range(1, cfg.max_iter + 1):
        t0 = time.time()
        ops = mean_field_operator(rho_in, cfg, grid)
        spectra = _diagonalize_all(ops, gap_window=True)
        occ, fermi = aufbau(spectra, cfg.N, cfg.c)
        if smear_T is not None:
            # thermostat: reheat while the (smeared) occupations still
            # jump, cool only after the field relaxed at the current T
            prev_resid = history[-1]["density_resid_rel"]
            flip_used = _occ_distance(occ_trail[-1], occ_trail[-2]) \
                if len(occ_trail) >= 2 else 0.0
            if flip_used > 0.3:
                smear_T = min(2.0 * smear_T, smear_T0)
                resid_at_cool = prev_resid
                cool_stall = -3        # quiet period before cooling resumes
            elif cool_stall >= 0 and (prev_resid <= 0.6 * resid_at_cool
                                      or cool_stall >= 8):
                smear_T = max(0.65 * smear_T, t_floor)
                resid_at_cool = prev_resid
                cool_stall = 0
            else:
                cool_stall += 1
            occ, fermi = fermi_occupations(spectra, cfg.N, smear_T, cfg.c)
        elif cfg.occ_damping == "auto" and len(occ_trail) >= 2 and it >= 6:
            raw = _occ_map(occ)
            flip = _occ_distance(raw, occ_trail[-1])
            period2 = _occ_distance(raw, occ_trail[-2])
            if flip > 0.5 and period2 < 0.1 * flip:
                # smear over the energy spread of the flipping levels
                moved = [k for k in set(raw) | set(occ_trail[-1])
                         if abs(float(raw.get(k, 0))
                                - float(occ_trail[-1].get(k, 0))) > 0.25]
                es = [float(spectra[kj].gap_energies()[lvl]) for kj, lvl in moved
                      if lvl < spectra[kj].gap_indices.size]
                smear_T = max(max(es) - min(es) if len(es) > 1 else 0.0,
                              1e-5 * cfg.c ** 2)
                smear_T0 = smear_T
                resid_at_cool = history[-1]["density_resid_rel"]
                cool_stall = 0
                if cfg.verbose:
                    print(f"  scf: occupation flip of weight {flip:.2f} at "
                          f"it={it}; annealed smearing from T={smear_T:.3e}")
                occ, fermi = fermi_occupations(spectra, cfg.N, smear_T, cfg.c)
        occ_trail.append(_occ_map(occ))
        if len(occ_trail) > 3:
            occ_trail.pop(0)
        rho_out = density_from_occupations(spectra, occ)
        terms = _energy_terms(spectra, occ, rho_out, cfg)
        e_now = terms["E_S"]

        if rho_scale is None:
            rho_scale = max(coulomb_energy(rho_out), 1e-300)
        resid = coulomb_norm_signed(grid, rho_out.rho - rho_in.rho)
        resid_rel = math.sqrt(max(resid, 0.0) / rho_scale)
        de_rel = abs(e_now - e_prev) / max(abs(e_now), 1e-300) if e_prev is not None else math.inf
        history.append({"iter": it, "E_S": e_now, "dE_rel": de_rel,
                        "density_resid_rel": resid_rel,
                        "seconds": time.time() - t0})
        if cfg.verbose:
            print(f"  scf[{init}] it={it:3d} E={e_now:+.10e} dE={de_rel:.2e} "
                  f"dD={resid_rel:.2e}")
        annealed = smear_T is None or smear_T <= t_floor * (1.0 + 1e-12)
        if de_rel < cfg.tol_energy and resid_rel < cfg.tol_density and annealed:
            # recompute the complete eigenbases for the reported state
            spectra = _diagonalize_all(ops)
            if smear_T is None:
                occ, fermi = aufbau(spectra, cfg.N, cfg.c)
            else:
                # keep the annealed occupations; level labels are stable
                occ, fermi = _carry_occupations(_occ_map(occ), spectra)
            rho_out = density_from_occupations(spectra, occ)
            terms = _energy_terms(spectra, occ, rho_out, cfg)
            phi = (1.0 - 1.0 / cfg.N) * hartree_potential(rho_out) if cfg.N > 1 \
                else np.zeros(grid.n)
            state = SCFState(config=cfg, grid=grid, spectra=spectra,
                             occupations=occ, rho=rho_out, phi_star=phi,
                             fermi_level=fermi, energies=terms,
                             residuals={"energy_change_rel": de_rel,
                                        "density_resid_rel": resid_rel},
                             iterations=it, converged=True, history=history)
            return state
        # oscillation heuristic: energy rising over several accepted steps
        if len(history) > 6:
            recent = [h["E_S"] for h in history[-4:]]
            if all(recent[i + 1] > recent[i] for i in range(3)) and cfg.verbose:
                print("  scf: energy rising for 4 iterations; "
                      "consider a smaller mixing alpha")
        mixed = (1.0 - alpha) * rho_in.rho + alpha * rho_out.rho
        rho_in = RadialDensity(grid=grid, rho=mixed,
                               total=(1.0 - alpha) * rho_in.total + alpha * rho_out.total)
        e_prev = e_now
    raise SCFNonConvergence(
        f"SCF did not converge in {cfg.max_iter} iterations "
        f"(last dE={history[-1]['dE_rel']:.2e}, "
        f"dD={history[-1]['density_resid_rel']:.2e})", history)


# --- retraction machinery -----------------------------------------------------

def occupation_matrices(spectra: dict[int, ChannelSpectrum],
                        occ: OccupationTable) -> dict[int, np.ndarray]:
    """Per-channel per-substate density matrices in the flat grid basis."""
    out = {}
    for kj, spec in spectra.items():
        dim = spec.eigenvalues.size
        out[kj] = np.zeros((dim, dim))
    for kj, lvl, nu in occ.entries:
        spec = spectra[kj]
        vec = spec.eigenvectors[:, spec.gap_indices[lvl]]
        out[kj] += (float(nu) / (2 * abs(kj))) * np.outer(vec, vec)
    return out


def density_from_matrices(grid: RadialGrid, mats: dict[int, np.ndarray]) -> RadialDensity:
    """Radial density of per-channel matrices (channel multiplicity applied)."""
    from .meanfield import _interp_half_density
    n = grid.n
    dens_flat = np.zeros(n)
    for kj, M in mats.items():
        mult = 2 * abs(kj)
        dens_flat += mult * np.diag(M[:n, :n]).copy()
        dens_flat += mult * np.maximum(_interp_half_density(np.diag(M[n:, n:]).copy()), 0.0)
    rho = dens_flat / (grid.h * grid.r) / (4.0 * np.pi * grid.r ** 2)
    return RadialDensity(grid=grid, rho=rho,
                         total=float(np.sum([np.trace(M) * 2 * abs(kj)
                                             for kj, M in mats.items()])))


def retraction_step(spectra: dict[int, ChannelSpectrum],
                    gamma: dict[int, np.ndarray] | OccupationTable,
                    cfg: SCFConfig):
    """One application of the constraint-restoring map.

    Builds the mean-field operator from the state's own density,
    projects the state onto its positive subspace, and reports the
    defect ||T(gamma) - gamma|| in the momentum-weighted trace norm.

    Returns (new spectra, projected channel matrices, defect).
    """
    grid = next(iter(spectra.values())).op.grid
    if isinstance(gamma, OccupationTable):
        mats = occupation_matrices(spectra, gamma)
    else:
        mats = gamma
    rho = density_from_matrices(grid, mats)
    ops = mean_field_operator(rho, cfg, grid)
    new_spectra = _diagonalize_all(ops)
    projected = {}
    defect = 0.0
    for kj, M in mats.items():
        P = positive_projector(new_spectra[kj])
        PMP = P @ M @ P
        projected[kj] = PMP
        defect += 2 * abs(kj) * xc_norm_channel_matrix(grid, kj, cfg.c, PMP - M)
    return new_spectra, projected, defect


def theta(spectra: dict[int, ChannelSpectrum],
          gamma: dict[int, np.ndarray] | OccupationTable,
          cfg: SCFConfig, tol: float = 1e-8, max_n: int = 40):
    """Iterate the retraction to its fixed point.

    Requires contraction (defect ratio < 1) within the first three
    steps; reports the geometric tail bound defect * L/(1 - L) from the
    worst observed late ratio.
    """
    if isinstance(gamma, OccupationTable):
        gamma = occupation_matrices(spectra, gamma)
    defects = []
    for step in range(max_n):
        spectra, gamma, defect = retraction_step(spectra, gamma, cfg)
        defects.append(defect)
        if defect < tol:
            L = defects[-1] / defects[-2] if len(defects) > 1 else 0.0
            tail = defect * L / (1.0 - L) if L < 1.0 else math.inf
            return spectra, gamma, {"defects": defects, "tail_bound": tail,
                                    "iterations": step + 1}
        if len(defects) >= 3:
            ratios = [defects[i + 1] / defects[i] for i in range(len(defects) - 1)]
            if min(ratios[:3]) >= 1.0:
                raise ContractionError(
                    f"no contraction in first steps; defect ratios {ratios[:3]}")
    raise ContractionError(
        f"retraction did not reach tol={tol} in {max_n} steps; "
        f"defects {defects[:3]}...{defects[-2:]}")


def euler_check(state: SCFState) -> EulerReport:
    """Structural residuals of a converged state.

    Covers the retraction defect, occupation ordering violations, the
    chemical-potential band, exact particle number, and the finite-basis
    certificate Pperp D_{c,Z} Pperp <= c^2 on the bare operator.
    """
    cfg = state.config
    c2 = cfg.c ** 2
    _, _, defect = retraction_step(state.spectra, state.occupations, cfg)
    norm_xc = 0.0
    from .meanfield import xc_norm_occupied
    norm_xc = xc_norm_occupied(state.spectra, state.occupations, cfg.c)

    # occupation ordering: an occupied level strictly above a non-full one
    tol = DEGENERACY_RTOL * c2
    levels = []
    occ_map = {(kj, lvl): nu for kj, lvl, nu in state.occupations.entries}
    for kj, spec in state.spectra.items():
        for lvl, e in enumerate(spec.gap_energies()):
            levels.append((float(e), occ_map.get((kj, lvl), Fraction(0)),
                           Fraction(2 * abs(kj))))
    violations = 0
    for e_a, nu_a, _ in levels:
        if nu_a > 0:
            for e_b, nu_b, mult_b in levels:
                if e_b < e_a - tol and nu_b < mult_b:
                    violations += 1
    band = (c2 * np.sqrt(1.0 - cfg.kappa ** 2), c2)
    slack = math.inf
    for kj, spec in state.spectra.items():
        grid = spec.op.grid
        bare = assemble_channel(grid, kj, cfg.c, -cfg.Z / grid.r, -cfg.Z / grid.r_half)
        P = positive_projector(spec)
        Pp = np.eye(P.shape[0]) - P
        M = Pp @ bare.H @ Pp
        slack = min(slack, operator_order(M, c2 * np.eye(M.shape[0])))
    trace_defect = abs(float(state.occupations.total) - cfg.N)
    return EulerReport(retraction_defect=defect, state_norm_xc=norm_xc,
                       aufbau_violations=violations,
                       fermi_level=state.fermi_level, fermi_band=band,
                       fermi_in_band=bool(band[0] < state.fermi_level < band[1]),
                       trace_defect=trace_defect,
                       boundedness_slack=slack)
