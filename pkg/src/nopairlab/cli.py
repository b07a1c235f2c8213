"""Command-line interface.

Subcommands: constants | scott | scf | tf | mittleman | sweep.  A JSON
config file (sections "grid", "scf", "sweep") supplies defaults; flags
override it.  Tables are CSV with a leading config-hash comment; report
paths also render the matching figure as PNG.  Exit codes: 0 success,
2 convergence failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


class ConfigError(ValueError):
    pass


def _scf_overrides(args, config: dict) -> dict:
    out = dict(config.get("scf", {}))
    grid = config.get("grid", {})
    if "rmin" in grid:
        out["rmin"] = grid["rmin"]
    if "rmax" in grid:
        out["rmax"] = grid["rmax"]
    if "n" in grid:
        out["n_grid"] = grid["n"]
    for key, attr in (("alpha", "alpha"), ("tol", "tol_energy"),
                      ("kmax", "k_max")):
        val = getattr(args, key, None)
        if val is not None:
            out[attr] = val
    if getattr(args, "tol", None) is not None:
        out["tol_density"] = math.sqrt(args.tol) if args.tol > 0 else args.tol
    return out


def _parse_picture(token: str, kappa: float):
    from .mittleman import coulomb_prime, free_picture, furry
    token = token.strip()
    if token == "furry":
        return furry()
    if token == "free":
        return free_picture()
    if token.startswith("coulomb_prime"):
        try:
            val = float(token.split(":", 1)[1])
        except (IndexError, ValueError):
            raise ConfigError(f"bad picture token '{token}' "
                              "(expected coulomb_prime:<kappa'>)")
        return coulomb_prime(val)
    if token == "half":
        return coulomb_prime(kappa / 2.0)
    raise ConfigError(f"unknown picture '{token}'")


def cmd_constants(args, config) -> int:
    from .constants import admissible_region, kappa_constants
    from .plotting import save_region_figure
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.kappa is not None:
        kc = kappa_constants(args.kappa)
        print(json.dumps(asdict(kc), indent=2, sort_keys=True))
    n = args.grid
    if n:
        kg = np.linspace(1e-3, 1.0 - 1e-3, n)
        kpg = np.linspace(-1.0 + 1e-3, 1.0 - 1e-3, n)
        region, curve = admissible_region(kg, kpg)
        out = Path(args.out) if args.out else out_dir / "admissible_region.csv"
        with open(out, "w") as fh:
            fh.write("kappa,kappa_prime,admissible\n")
            for i, k in enumerate(kg):
                for j, kp in enumerate(kpg):
                    fh.write(f"{k:.9f},{kp:.9f},{1 if region[i, j] else 0}\n")
        curve_path = out.with_name(out.stem + "_boundary.dat")
        np.savetxt(curve_path, curve, fmt="%.12e")
        fig = save_region_figure(kg, kpg, region, curve,
                                 out.with_suffix(".png"))
        print(f"wrote {out}, {curve_path}, {fig}")
    return 0


def cmd_scott(args, config) -> int:
    from .grid import make_log_grid
    from .hydrogenic import scott_br, scott_furry
    if args.picture == "furry":
        est = scott_furry(args.kappa, args.nmax)
    else:
        gcfg = config.get("grid", {})
        zs = args.kappa  # scaled units: coupling plays the role of Z
        grid = make_log_grid(gcfg.get("rmin", 2e-6 / zs),
                             gcfg.get("rmax", 8.0 * (args.br_nmax + 2) ** 2 / zs),
                             gcfg.get("n", 1500))
        est = scott_br(args.kappa, grid, n_max=args.br_nmax, n_max_furry=args.nmax)
    print(json.dumps({"kappa": est.kappa, "estimate": est.estimate,
                      "tail_error": est.tail_error, "nmax": est.n_max},
                     indent=2, sort_keys=True))
    return 0


def cmd_scf(args, config) -> int:
    from .meanfield import hartree_potential
    from .plotting import save_density_figure
    from .scf import SCFConfig, SCFNonConvergence, euler_check, scf_solve
    overrides = _scf_overrides(args, config)
    cfg = SCFConfig(N=args.N if args.N is not None else int(round(args.Z)),
                    Z=args.Z, kappa=args.kappa,
                    uniqueness_probe=args.uniqueness_probe, **overrides)
    try:
        state = scf_solve(cfg)
    except SCFNonConvergence as exc:
        print(f"scf: {exc}", file=sys.stderr)
        return 2
    rep = euler_check(state)
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": {k: v for k, v in asdict(cfg).items()},
        "energies": state.energies,
        "fermi_level": state.fermi_level,
        "iterations": state.iterations,
        "residuals": state.residuals,
        "occupations": [[kj, lvl, float(nu), str(nu)]
                        for kj, lvl, nu in state.occupations.entries],
        "euler": asdict(rep),
        "uniqueness": state.uniqueness,
    }
    state_path = prefix.with_suffix(".json")
    state_path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    dens_path = prefix.with_name(prefix.name + "_density.csv")
    phi = hartree_potential(state.rho)
    with open(dens_path, "w") as fh:
        fh.write("r,rho,phi\n")
        for r, rho, p in zip(state.grid.r, state.rho.rho, phi):
            fh.write(f"{r:.12e},{rho:.12e},{p:.12e}\n")
    fig = save_density_figure(state.grid, state.rho.rho, state.phi_star,
                              prefix.with_name(prefix.name + "_density.png"))
    print(f"E_S = {state.energies['E_S']:.10e} "
          f"({state.iterations} iterations); wrote {state_path}, {dens_path}, {fig}")
    return 0


def cmd_tf(args, config) -> int:
    from .grid import make_log_grid
    from .plotting import save_tf_figure
    from .thomasfermi import TF_LENGTH, solve_universal, tf_density, tf_energy
    sol = solve_universal()
    out_dir = Path(args.out) if args.out else Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ypath = out_dir / "tf_screening.dat"
    np.savetxt(ypath, np.column_stack([sol.x, sol.y]), fmt="%.12e")
    grid = make_log_grid(1e-7 / args.Z, 600.0 / args.Z ** (1.0 / 3.0), 4000)
    rho = tf_density(args.Z, grid, sol)
    dpath = out_dir / f"tf_density_Z{args.Z:g}.csv"
    with open(dpath, "w") as fh:
        fh.write("r,rho\n")
        for r, d in zip(grid.r, rho.rho):
            fh.write(f"{r:.12e},{d:.12e}\n")
    fig = save_tf_figure(sol.x, sol.y, out_dir / "tf_screening.png")
    print(json.dumps({"slope": sol.slope,
                      "energy_coefficient": sol.energy_coefficient,
                      "energy": tf_energy(args.Z, sol),
                      "density_total": rho.total}, indent=2, sort_keys=True))
    print(f"wrote {ypath}, {dpath}, {fig}")
    return 0


def cmd_mittleman(args, config) -> int:
    from .harness import mittleman_csv
    from .mittleman import mean_field_picture, picture_report
    from .scf import SCFConfig, SCFNonConvergence, scf_solve
    overrides = _scf_overrides(args, config)
    cfg = SCFConfig(N=int(round(args.Z)), Z=args.Z, kappa=args.kappa, **overrides)
    try:
        state = scf_solve(cfg)
    except SCFNonConvergence as exc:
        print(f"mittleman: {exc}", file=sys.stderr)
        return 2
    specs = [_parse_picture(tok, args.kappa) for tok in args.pictures.split(",")]
    if args.mean_field_picture:
        specs.append(mean_field_picture(state.rho))
    records = []
    for spec in specs:
        rec = picture_report(state, spec)
        rec["Z"] = args.Z
        records.append(rec)
    payload = {"Z": args.Z, "kappa": args.kappa,
               "pictures": [s.label for s in specs],
               "scf": {k: v for k, v in sorted(overrides.items())}}
    out = Path(args.out) if args.out else Path(args.out_dir) / "mittleman.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(mittleman_csv(records, payload))
    print(f"wrote {out}")
    return 0


def cmd_sweep(args, config) -> int:
    from .harness import (fit_scott, fit_scott_free, rows_to_csv, sweep,
                          sweep_config_payload)
    from .hydrogenic import scott_furry
    from .plotting import save_scott_figure
    overrides = _scf_overrides(args, config)
    sweep_cfg = config.get("sweep", {})
    z_list = args.Z_list or sweep_cfg.get("z_list") or [20, 30, 40, 55, 70, 90]
    pictures = None
    if args.pictures is not None:
        pictures = [_parse_picture(t, args.kappa) for t in args.pictures.split(",")] \
            if args.pictures else []
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = sweep(z_list=z_list, kappa=args.kappa, pictures=pictures,
                 scf_overrides=overrides, out_dir=out_dir, verbose=True)
    labels = sorted({lab for r in rows for lab in r.pictures})
    payload = sweep_config_payload(z_list, args.kappa, labels, overrides)
    csv_path = out_dir / "sweep.csv"
    csv_path.write_text(rows_to_csv(rows, payload))
    n_bad = sum(not r.converged for r in rows)
    good = [r for r in rows if r.converged]
    if len(good) >= 4:
        fit = fit_scott(rows)
        ref = scott_furry(args.kappa).estimate
        trend = np.column_stack([[r.Z for r in good],
                                 [r.scott_residual for r in good]])
        np.savetxt(out_dir / "scott_trend.dat", trend, fmt="%.12e")
        save_scott_figure([r.Z for r in good], [r.scott_residual for r in good],
                          fit.intercept, fit.slope, ref,
                          out_dir / "scott_trend.png")
        result = {"intercept": fit.intercept, "stderr": fit.stderr,
                  "slope": fit.slope, "reference_level_sum": ref}
        if args.free_tf:
            c_tf, ffit = fit_scott_free(rows)
            result["free_tf_coefficient"] = c_tf
            result["free_tf_intercept"] = ffit.intercept
        print(json.dumps(result, indent=2, sort_keys=True))
    print(f"wrote {csv_path} ({n_bad} non-converged rows)")
    return 2 if n_bad else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nopairlab",
                                description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out-dir", default="out", help="output directory")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("constants", help="closed-form constants and region")
    pc.add_argument("--kappa", type=float)
    pc.add_argument("--grid", type=int, default=0, help="region grid size")
    pc.add_argument("--out")
    pc.set_defaults(func=cmd_constants)

    ps = sub.add_parser("scott", help="Scott coefficient estimates")
    ps.add_argument("--kappa", type=float, required=True)
    ps.add_argument("--nmax", type=int, default=200)
    ps.add_argument("--picture", choices=("furry", "br"), default="furry")
    ps.add_argument("--br-nmax", type=int, default=8)
    ps.set_defaults(func=cmd_scott)

    pf = sub.add_parser("scf", help="converge one atom")
    pf.add_argument("--Z", type=float, required=True)
    pf.add_argument("--N", type=int)
    pf.add_argument("--kappa", type=float, default=0.5)
    pf.add_argument("--alpha", type=float)
    pf.add_argument("--tol", type=float)
    pf.add_argument("--kmax", type=int)
    pf.add_argument("--out-prefix", default="out/scf")
    pf.add_argument("--uniqueness-probe", action="store_true")
    pf.set_defaults(func=cmd_scf)

    pt = sub.add_parser("tf", help="Thomas-Fermi reference")
    pt.add_argument("--Z", type=float, required=True)
    pt.add_argument("--out")
    pt.set_defaults(func=cmd_tf)

    pm = sub.add_parser("mittleman", help="picture decomposition table")
    pm.add_argument("--Z", type=float, required=True)
    pm.add_argument("--kappa", type=float, default=0.5)
    pm.add_argument("--pictures", default="coulomb_prime:-0.5,free,half,furry")
    pm.add_argument("--no-mean-field-picture", dest="mean_field_picture",
                    action="store_false")
    pm.add_argument("--alpha", type=float)
    pm.add_argument("--tol", type=float)
    pm.add_argument("--kmax", type=int)
    pm.add_argument("--out")
    pm.set_defaults(func=cmd_mittleman)

    pw = sub.add_parser("sweep", help="Z sweep with trend columns")
    pw.add_argument("--Z-list", type=float, nargs="*")
    pw.add_argument("--kappa", type=float, default=0.5)
    pw.add_argument("--pictures", help="comma list; empty string disables")
    pw.add_argument("--alpha", type=float)
    pw.add_argument("--tol", type=float)
    pw.add_argument("--kmax", type=int)
    pw.add_argument("--free-tf", action="store_true")
    pw.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
