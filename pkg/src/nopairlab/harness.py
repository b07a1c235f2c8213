"""Z-sweep orchestration, large-Z trend columns, and the Scott-term fit.

Every row normalizes the converged observables by the power of Z that
theory assigns them, so boundedness of a column across the sweep is the
finite-Z surrogate of the corresponding O(.) claim.  Rows persist as
JSON keyed by the configuration hash, making an interrupted sweep
resumable and its output reproducible byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .meanfield import coulomb_energy, trace_diagnostics
from .mittleman import PictureSpec, coulomb_prime, mean_field_picture, picture_report
from .scf import SCFConfig, SCFNonConvergence, euler_check, scf_solve
from .thomasfermi import coulomb_distance, solve_universal

DEFAULT_Z_LIST = (20, 30, 40, 55, 70, 90)

PICTURE_COLUMNS = ("E_H_gammaA", "I", "II", "III", "cross_check",
                   "birman_norm", "trace_condition", "boundedness_slack",
                   "trace_gammaA", "fermi_amaldi_remainder")


@dataclass
class SweepRow:
    Z: float
    N: int
    kappa: float
    converged: bool
    iterations: int
    E_S: float = math.nan
    scott_residual: float = math.nan       # (E_S - C_TF Z^{7/3}) / Z^2
    ztr_invr_norm: float = math.nan        # Z tr[|.|^{-1} gamma] / Z^{7/3}
    coulomb_norm: float = math.nan         # D[rho] / Z^{7/3}
    abs_p_norm: float = math.nan           # tr[|p| gamma] / Z^{5/3}
    phi_sup_norm: float = math.nan         # sup phi / Z^{4/3}
    tf_distance_norm: float = math.nan     # D[rho - rho_TF] / Z^2
    retraction_defect_rel: float = math.nan
    boundedness_slack: float = math.nan
    pictures: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScottFit:
    intercept: float
    stderr: float
    slope: float
    n_rows: int


def default_pictures(kappa: float) -> list[PictureSpec]:
    """Report set: weird Coulomb pictures around the physical one."""
    return [coulomb_prime(-0.5), coulomb_prime(0.0), coulomb_prime(kappa / 2.0),
            coulomb_prime(kappa)]


def config_hash(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


def sweep_config_payload(z_list, kappa: float, picture_labels,
                         scf_overrides: dict) -> dict:
    return {"z_list": list(map(float, z_list)), "kappa": kappa,
            "pictures": list(picture_labels),
            "scf": {k: v for k, v in sorted(scf_overrides.items())}}


def run_row(Z: float, kappa: float, pictures, scf_overrides: dict,
            include_mean_field_picture: bool = True,
            with_euler: bool = True) -> SweepRow:
    """One converged atom with trend columns and per-picture reports."""
    N = int(round(Z))
    cfg = SCFConfig(N=N, Z=float(Z), kappa=kappa, **scf_overrides)
    try:
        state = scf_solve(cfg)
    except SCFNonConvergence:
        return SweepRow(Z=float(Z), N=N, kappa=kappa, converged=False,
                        iterations=cfg.max_iter)
    z73 = Z ** (7.0 / 3.0)
    tf = solve_universal()
    traces = trace_diagnostics(state.spectra, state.occupations, cfg.Z, cfg.c)
    row = SweepRow(
        Z=float(Z), N=N, kappa=kappa, converged=True,
        iterations=state.iterations,
        E_S=state.energies["E_S"],
        scott_residual=(state.energies["E_S"] - tf.energy_coefficient * z73) / Z ** 2,
        ztr_invr_norm=Z * traces.inv_r / z73,
        coulomb_norm=coulomb_energy(state.rho) / z73,
        abs_p_norm=traces.abs_p / Z ** (5.0 / 3.0),
        phi_sup_norm=float(np.max(state.phi_star)) / Z ** (4.0 / 3.0),
        tf_distance_norm=coulomb_distance(state.rho, Z, tf) / Z ** 2,
    )
    if with_euler:
        rep = euler_check(state)
        row.retraction_defect_rel = rep.relative_defect
        row.boundedness_slack = rep.boundedness_slack
    specs = list(pictures)
    if include_mean_field_picture:
        specs.append(mean_field_picture(state.rho))
    for spec in specs:
        rec = picture_report(state, spec)
        row.pictures[spec.label] = {k: rec[k] for k in PICTURE_COLUMNS
                                    if k in rec}
    return row


def sweep(z_list=DEFAULT_Z_LIST, kappa: float = 0.5, pictures=None,
          scf_overrides: dict | None = None, out_dir: str | Path | None = None,
          include_mean_field_picture: bool = True,
          verbose: bool = False) -> list[SweepRow]:
    """Run (or resume) a Z sweep; rows persist under out_dir when given."""
    scf_overrides = dict(scf_overrides or {})
    pictures = default_pictures(kappa) if pictures is None else list(pictures)
    payload = sweep_config_payload(z_list, kappa, [p.label for p in pictures],
                                   scf_overrides)
    chash = config_hash(payload)
    cache = None
    if out_dir is not None:
        cache = Path(out_dir) / f"rows-{chash}"
        cache.mkdir(parents=True, exist_ok=True)
    rows = []
    for Z in z_list:
        cpath = cache / f"Z{float(Z):g}.json" if cache else None
        if cpath is not None and cpath.exists():
            rows.append(SweepRow(**json.loads(cpath.read_text())))
            continue
        if verbose:
            print(f"sweep: Z={Z}")
        row = run_row(Z, kappa, pictures, scf_overrides,
                      include_mean_field_picture)
        rows.append(row)
        if cpath is not None:
            cpath.write_text(json.dumps(asdict(row), sort_keys=True))
    return rows


def fit_scott(rows: list[SweepRow], tf_coefficient: float | None = None) -> ScottFit:
    """Affine fit of the Z^2-scaled residual against Z^{-1/3}.

    The intercept estimates the Z^2 coefficient; the slope absorbs the
    next-order drift.  tf_coefficient defaults to the computed TF value
    (rows already carry residuals built with it).
    """
    good = [r for r in rows if r.converged and math.isfinite(r.scott_residual)]
    if len(good) < 4:
        raise ValueError(f"need at least 4 converged rows, got {len(good)}")
    z = np.array([r.Z for r in good])
    resid = np.array([r.scott_residual for r in good])
    if tf_coefficient is not None:
        tf0 = solve_universal().energy_coefficient
        resid = resid + (tf0 - tf_coefficient) * z ** (1.0 / 3.0)
    X = np.column_stack([np.ones_like(z), z ** (-1.0 / 3.0)])
    coef, res_ss, rank, _ = np.linalg.lstsq(X, resid, rcond=None)
    if rank < 2:
        raise RuntimeError("singular design matrix in the Scott fit")
    fitted = X @ coef
    dof = max(len(good) - 2, 1)
    sigma2 = float(np.sum((resid - fitted) ** 2)) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return ScottFit(intercept=float(coef[0]), stderr=float(np.sqrt(cov[0, 0])),
                    slope=float(coef[1]), n_rows=len(good))


def fit_scott_free(rows: list[SweepRow]) -> tuple[float, ScottFit]:
    """Sensitivity variant fitting the Z^{7/3} coefficient as well.

    Model: E/Z^2 = c_tf Z^{1/3} + intercept + slope Z^{-1/3}; returns
    (fitted TF coefficient, Scott fit record).
    """
    good = [r for r in rows if r.converged and math.isfinite(r.E_S)]
    if len(good) < 5:
        raise ValueError(f"need at least 5 converged rows, got {len(good)}")
    z = np.array([r.Z for r in good])
    y = np.array([r.E_S for r in good]) / z ** 2
    X = np.column_stack([z ** (1.0 / 3.0), np.ones_like(z), z ** (-1.0 / 3.0)])
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < 3:
        raise RuntimeError("singular design matrix in the free-TF Scott fit")
    fitted = X @ coef
    dof = max(len(good) - 3, 1)
    sigma2 = float(np.sum((y - fitted) ** 2)) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    fit = ScottFit(intercept=float(coef[1]), stderr=float(np.sqrt(cov[1, 1])),
                   slope=float(coef[2]), n_rows=len(good))
    return float(coef[0]), fit


# --- delimited output ---------------------------------------------------------

_BASE_COLUMNS = ("Z", "N", "kappa", "converged", "iterations", "E_S",
                 "scott_residual", "ztr_invr_norm", "coulomb_norm",
                 "abs_p_norm", "phi_sup_norm", "tf_distance_norm",
                 "retraction_defect_rel", "boundedness_slack")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "nan"
    return f"{float(v):.12e}"


def rows_to_csv(rows: list[SweepRow], payload: dict) -> str:
    """Deterministic CSV: config-hash comment, wide picture columns."""
    labels = sorted({lab for r in rows for lab in r.pictures})
    header = list(_BASE_COLUMNS)
    for lab in labels:
        for col in PICTURE_COLUMNS:
            header.append(f"{lab}:{col}")
    lines = [f"# config {config_hash(payload)} {json.dumps(payload, sort_keys=True)}",
             ",".join(header)]
    for r in rows:
        vals = [_fmt(getattr(r, c)) for c in _BASE_COLUMNS]
        for lab in labels:
            rec = r.pictures.get(lab, {})
            vals.extend(_fmt(rec.get(col)) for col in PICTURE_COLUMNS)
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def mittleman_csv(rows_records: list[dict], payload: dict) -> str:
    """Long-format picture table: one line per (Z, picture)."""
    header = ["Z", "picture", "E_H_gammaA", "I", "II", "III", "cross_check",
              "birman_norm", "trace_cond"]
    lines = [f"# config {config_hash(payload)} {json.dumps(payload, sort_keys=True)}",
             ",".join(header)]
    for rec in rows_records:
        lines.append(",".join([
            _fmt(rec["Z"]), rec["picture"], _fmt(rec["E_H_gammaA"]),
            _fmt(rec["I"]), _fmt(rec["II"]), _fmt(rec["III"]),
            _fmt(rec["cross_check"]), _fmt(rec["birman_norm"]),
            _fmt(rec["trace_condition"])]))
    return "\n".join(lines) + "\n"
