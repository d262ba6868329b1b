"""Command-line front end.

Every command resolves its configuration from built-in defaults, then an
optional JSON config file, then explicit flags (flags win), runs the
computation, and writes CSV outputs plus a JSON sidecar into --out-dir.
Outputs are byte-deterministic for a fixed config and seed; the sidecar's
wall-clock field is the only exception.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
Configuration errors emit a single JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from . import localizer as loc
from . import runio
from .liouville import (
    DegenerateSteadyStateError,
    ModelParameters,
    build_superoperator,
    extract_hoppings,
    spectrum,
    steady_state,
)
from .spincore import SpinRepresentation, build_tensor_basis, decompose
from .validate import SUITES, run_suite

PRESET_STATES = {
    "polarized": (0.0, 0.0),
    "inverted": (np.pi, 0.0),
    "equator": (np.pi / 2, 0.0),
}


class ConfigError(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintop",
        description=(
            "Collective-spin Lindblad dynamics on the operator-space lattice: "
            "spectra, hopping amplitudes, spectral-localizer topology, and "
            "trajectory experiments."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, model=True):
        p.add_argument("--config", type=Path, help="JSON config file; flags override it")
        p.add_argument("--out-dir", type=Path, help="output directory (default: ./out/<command>)")
        p.add_argument("--seed", type=int, help="seed for randomized validation sampling")
        p.add_argument("--threads", type=int, help="worker threads for sweeps (default: all cores)")
        if model:
            p.add_argument("--n-spins", type=_positive_int, help="number of spins N (j = N/2)")
            p.add_argument("--omega", type=float, help="drive strength")
            p.add_argument("--gamma", type=float, help="collective decay rate")

    p = sub.add_parser("basis", help="dump the tensor basis and its Gram residual")
    add_common(p)
    p.add_argument("--dump-matrices", action="store_true",
                   help="write one row,col,re,im CSV per tensor")

    p = sub.add_parser("spectrum", help="eigenvalues of the generator")
    add_common(p)

    p = sub.add_parser("hoppings", help="stencil amplitudes of the hopping model")
    add_common(p)

    def add_localizer_common(p):
        p.add_argument("--kappa", type=float, help="position-term weight (default 1)")
        p.add_argument("--lambda0-re", type=float, help="probe frequency, real part (default 0)")
        p.add_argument("--lambda0-im", type=float, help="probe frequency, imaginary part (default 0)")
        p.add_argument("--zero-tol-factor", type=float,
                       help="signature zero tolerance relative to the localizer max-norm")

    p = sub.add_parser("localizer-x", help="index and gap along the rank coordinate")
    add_common(p)
    add_localizer_common(p)
    p.add_argument("--x-min", type=float, help="sweep start (default 0)")
    p.add_argument("--x-max", type=float, help="sweep end (default 2j)")
    p.add_argument("--x-step", type=float, help="sweep step (default 0.1)")

    p = sub.add_parser("localizer-plane", help="index over the complex-frequency plane")
    add_common(p)
    add_localizer_common(p)
    p.add_argument("--x0", type=float, help="probe rank coordinate (default 1)")
    p.add_argument("--re-min", type=float, help="plane window; defaults to the padded spectrum box")
    p.add_argument("--re-max", type=float)
    p.add_argument("--im-min", type=float)
    p.add_argument("--im-max", type=float)
    p.add_argument("--re-count", type=_positive_int, help="grid columns (default 101)")
    p.add_argument("--im-count", type=_positive_int, help="grid rows (default 101)")

    p = sub.add_parser("kappa-sweep", help="position sweeps over a list of kappa values")
    add_common(p)
    p.add_argument("--kappa-list", type=str, help="comma-separated kappas (default 0.01,0.1,0.5,1,2,5)")
    p.add_argument("--lambda0-re", type=float)
    p.add_argument("--lambda0-im", type=float)
    p.add_argument("--zero-tol-factor", type=float)
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--x-step", type=float)

    p = sub.add_parser("modes", help="rank-resolved weights of every eigenmode")
    add_common(p)

    p = sub.add_parser("evolve", help="integrate trajectories from coherent initial states")
    add_common(p)
    p.add_argument("--state", action="append", metavar="THETA,PHI|NAME",
                   help="initial state; repeatable (presets: polarized, inverted, equator)")
    p.add_argument("--t-max", type=float, help="final time (default 30)")
    p.add_argument("--t-count", type=_positive_int, help="number of samples (default 601)")
    p.add_argument("--dump-coefficients", action="store_true",
                   help="also write the full coefficient trajectory per state")

    p = sub.add_parser("validate", help="run the self-check battery")
    add_common(p)
    p.add_argument("--suite", action="append",
                   help=f"suite name, repeatable (default all; choices: {', '.join(sorted(SUITES))})")
    p.add_argument("--j-max", type=float, help="largest j for the algebra suite")
    p.add_argument("--samples-trace", type=_positive_int)
    p.add_argument("--samples-equivalence", type=_positive_int)
    p.add_argument("--samples-hn", type=_positive_int)
    p.add_argument("--inject", choices=["alt-sign"],
                   help="test hook: deliberately break a check to exercise the failure path")
    return parser


DEFAULTS = {
    "n_spins": 10,
    "omega": 1.0,
    "gamma": 1.0,
    "seed": 1234,
    "kappa": 1.0,
    "lambda0_re": 0.0,
    "lambda0_im": 0.0,
    "zero_tol_factor": loc.DEFAULT_ZERO_TOL_FACTOR,
    "x0": 1.0,
    "x_min": 0.0,
    "x_max": None,  # 2j
    "x_step": 0.1,
    "re_min": None,
    "re_max": None,
    "im_min": None,
    "im_max": None,
    "re_count": 101,
    "im_count": 101,
    "kappa_list": "0.01,0.1,0.5,1,2,5",
    "t_max": 30.0,
    "t_count": 601,
    "threads": None,
    "state": None,
    "dump_matrices": False,
    "dump_coefficients": False,
    "suite": None,
    "j_max": 5.0,
    "samples_trace": 20,
    "samples_equivalence": 100,
    "samples_hn": 20,
    "inject": None,
}


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < explicit flags into one dict."""
    merged = dict(DEFAULTS)
    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}")
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS) - {"out_dir", "command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key, value in vars(args).items():
        if key in ("command", "config", "out_dir"):
            continue
        if value is not None and value is not False:
            merged[key] = value
    for key in ("omega", "gamma", "kappa", "t_max", "x_step"):
        val = merged.get(key)
        if val is not None and not np.isfinite(val):
            raise ConfigError(f"{key} must be finite, got {val}")
    if merged["omega"] < 0 or merged["gamma"] < 0:
        raise ConfigError("omega and gamma must be nonnegative")
    merged["out_dir"] = args.out_dir or Path("out") / args.command
    merged["command"] = args.command
    if merged["threads"] is None:
        merged["threads"] = os.cpu_count() or 1
    return merged


def _model(cfg):
    rep = SpinRepresentation.from_n_spins(cfg["n_spins"])
    params = ModelParameters(
        omega=cfg["omega"], gamma_rate=cfg["gamma"], n_spins=cfg["n_spins"]
    )
    basis = build_tensor_basis(rep)
    return rep, params, basis


def _public_config(cfg):
    clean = {}
    for key, value in cfg.items():
        if isinstance(value, Path):
            clean[key] = str(value)
        elif isinstance(value, (np.floating, np.integer)):
            clean[key] = float(value)
        else:
            clean[key] = value
    clean["gamma_ratio_label"] = "gamma/omega"
    if cfg["omega"] > 0:
        clean["gamma_over_omega"] = cfg["gamma"] / cfg["omega"]
    return clean


def _x_grid(cfg, rep):
    x_max = cfg["x_max"] if cfg["x_max"] is not None else float(rep.n_spins)
    step = cfg["x_step"]
    if step <= 0 or x_max < cfg["x_min"]:
        raise ConfigError("x grid is degenerate")
    count = int(round((x_max - cfg["x_min"]) / step)) + 1
    return np.round(cfg["x_min"] + step * np.arange(count), 12)


def cmd_basis(cfg) -> int:
    rep, params, basis = _model(cfg)
    writer = runio.RunWriter(cfg["out_dir"], "basis", _public_config(cfg),
                             tolerances={"gram": 1e-12})
    if cfg["dump_matrices"]:
        for k, q in basis.labels():
            t = basis.tensor(k, q)
            rows = (
                (str(r), str(c), runio.fmt(t[r, c].real), runio.fmt(t[r, c].imag))
                for r in range(rep.dim) for c in range(rep.dim)
            )
            writer.csv(f"tensor_k{k}_q{q:+d}.csv", "row,col,re,im", rows)
    writer.finish(extra={
        "n_tensors": basis.size,
        "gram_residual": basis.gram_residual(),
    })
    return 0


def cmd_spectrum(cfg) -> int:
    rep, params, basis = _model(cfg)
    liouv = build_superoperator(rep, params, basis)
    decomp = spectrum(liouv)
    writer = runio.RunWriter(cfg["out_dir"], "spectrum", _public_config(cfg))
    writer.csv("spectrum.csv", runio.EIGENVALUE_HEADER,
               runio.eigenvalue_rows(decomp.eigenvalues))
    writer.finish(extra={
        "steady_indices": list(decomp.steady_indices),
        "zero_tol": decomp.zero_tol,
    })
    return 0


def cmd_hoppings(cfg) -> int:
    rep, params, basis = _model(cfg)
    liouv = build_superoperator(rep, params, basis)
    hop = extract_hoppings(liouv)
    writer = runio.RunWriter(cfg["out_dir"], "hoppings", _public_config(cfg),
                             tolerances={"stencil_residual": 1e-12 * liouv.max_abs()})
    writer.csv("hoppings.csv", runio.HOPPING_HEADER, runio.hopping_rows(hop))
    writer.finish(extra={
        "residual_norm": hop.residual_norm,
        "max_abs_entry": liouv.max_abs(),
        "nonreciprocity": hop.nonreciprocity(),
    })
    return 0


def cmd_localizer_x(cfg) -> int:
    rep, params, basis = _model(cfg)
    liouv = build_superoperator(rep, params, basis)
    pos = loc.position_superoperator(basis)
    lam0 = complex(cfg["lambda0_re"], cfg["lambda0_im"])
    grid = _x_grid(cfg, rep)
    sweep = loc.sweep_position(
        liouv, pos, grid, lam0, cfg["kappa"],
        zero_tol_factor=cfg["zero_tol_factor"], n_jobs=cfg["threads"],
    )
    writer = runio.RunWriter(cfg["out_dir"], "localizer-x", _public_config(cfg),
                             tolerances={"zero_tol_factor": cfg["zero_tol_factor"]})
    writer.csv("position_sweep.csv", runio.POSITION_SWEEP_HEADER,
               runio.sweep_rows_position(sweep))
    writer.finish(extra={
        "x_grid": {"min": float(grid[0]), "max": float(grid[-1]), "count": len(grid)},
        "boundaries": sweep.boundaries,
        "domains": sweep.nonzero_domains(),
    })
    return 0


def cmd_localizer_plane(cfg) -> int:
    rep, params, basis = _model(cfg)
    liouv = build_superoperator(rep, params, basis)
    pos = loc.position_superoperator(basis)
    decomp_vals = np.linalg.eigvals(liouv.m)
    re_lo, re_hi = cfg["re_min"], cfg["re_max"]
    im_lo, im_hi = cfg["im_min"], cfg["im_max"]
    if None in (re_lo, re_hi, im_lo, im_hi):
        # padded bounding box of the spectrum, 10% per side
        rmin, rmax = decomp_vals.real.min(), decomp_vals.real.max()
        imin, imax = decomp_vals.imag.min(), decomp_vals.imag.max()
        rpad = 0.1 * max(rmax - rmin, 1e-6)
        ipad = 0.1 * max(imax - imin, 1e-6)
        re_lo = rmin - rpad if re_lo is None else re_lo
        re_hi = rmax + rpad if re_hi is None else re_hi
        im_lo = imin - ipad if im_lo is None else im_lo
        im_hi = imax + ipad if im_hi is None else im_hi
    if not (re_hi > re_lo and im_hi > im_lo):
        raise ConfigError("plane window is degenerate")
    re_grid = np.linspace(re_lo, re_hi, cfg["re_count"])
    im_grid = np.linspace(im_lo, im_hi, cfg["im_count"])
    sweep = loc.sweep_spectral(
        liouv, pos, cfg["x0"], re_grid, im_grid, cfg["kappa"],
        zero_tol_factor=cfg["zero_tol_factor"], n_jobs=cfg["threads"],
        eigenvalues=decomp_vals,
    )
    writer = runio.RunWriter(cfg["out_dir"], "localizer-plane", _public_config(cfg),
                             tolerances={"zero_tol_factor": cfg["zero_tol_factor"]})
    writer.csv("spectral_sweep.csv", runio.SPECTRAL_SWEEP_HEADER,
               runio.sweep_rows_spectral(sweep))
    writer.csv("eigenvalues.csv", runio.EIGENVALUE_HEADER,
               runio.eigenvalue_rows(sweep.eigenvalues))
    writer.finish(extra={
        "plane_window": {"re_min": re_lo, "re_max": re_hi,
                         "im_min": im_lo, "im_max": im_hi,
                         "re_count": cfg["re_count"], "im_count": cfg["im_count"]},
        "islands": sweep.islands,
        "nonzero_cells": int((sweep.effective_nu() != 0).sum()),
    })
    return 0


def cmd_kappa_sweep(cfg) -> int:
    rep, params, basis = _model(cfg)
    liouv = build_superoperator(rep, params, basis)
    pos = loc.position_superoperator(basis)
    lam0 = complex(cfg["lambda0_re"], cfg["lambda0_im"])
    try:
        kappas = [float(x) for x in str(cfg["kappa_list"]).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad kappa list: {exc}")
    if not kappas or any(k <= 0 for k in kappas):
        raise ConfigError("kappa list must be positive")
    grid = _x_grid(cfg, rep)
    sweeps = loc.sweep_kappa(
        liouv, pos, grid, lam0, kappas,
        zero_tol_factor=cfg["zero_tol_factor"], n_jobs=cfg["threads"],
    )
    writer = runio.RunWriter(cfg["out_dir"], "kappa-sweep", _public_config(cfg),
                             tolerances={"zero_tol_factor": cfg["zero_tol_factor"]})

    def rows():
        for sweep in sweeps:
            yield from runio.sweep_rows_position(sweep)

    writer.csv("kappa_sweep.csv", runio.POSITION_SWEEP_HEADER, rows())
    report = loc.kappa_stability_report(sweeps)
    writer.json("kappa_stability.json", report)
    writer.finish(extra={"kappa_list": kappas,
                         "x_grid": {"min": float(grid[0]), "max": float(grid[-1]),
                                    "count": len(grid)}})
    return 0


def cmd_modes(cfg) -> int:
    rep, params, basis = _model(cfg)
    liouv = build_superoperator(rep, params, basis)
    decomp = spectrum(liouv)
    table = dyn.rank_weights(decomp, basis)
    writer = runio.RunWriter(cfg["out_dir"], "modes", _public_config(cfg))
    writer.csv("mode_weights.csv", runio.MODE_WEIGHT_HEADER,
               runio.mode_weight_rows(table))
    steady = None
    if len(decomp.steady_indices) == 1:
        steady = decomp.steady_indices[0]
    writer.finish(extra={
        "participation_ratio": [float(p) for p in table.participation_ratio],
        "steady_index": steady,
    })
    return 0


def _parse_states(cfg):
    raw = cfg["state"] or ["polarized"]
    states = []
    for item in raw:
        if item in PRESET_STATES:
            states.append(PRESET_STATES[item])
            continue
        try:
            theta, phi = (float(x) for x in item.split(","))
        except ValueError:
            raise ConfigError(
                f"bad state {item!r}: expected THETA,PHI or one of {sorted(PRESET_STATES)}"
            )
        states.append((theta, phi))
    return states


def cmd_evolve(cfg) -> int:
    rep, params, basis = _model(cfg)
    liouv = build_superoperator(rep, params, basis)
    decomp = spectrum(liouv)
    states = _parse_states(cfg)
    t_grid = np.linspace(0.0, cfg["t_max"], cfg["t_count"])
    writer = runio.RunWriter(cfg["out_dir"], "evolve", _public_config(cfg))
    rhos = []
    for i, (theta, phi) in enumerate(states):
        rho0 = dyn.coherent_spin_state(rep, theta, phi)
        rhos.append(rho0)
        traj = dyn.evolve(liouv, decompose(rho0, basis), t_grid, decomp=decomp)
        jx = dyn.observable_trajectory(traj, basis, "jx")
        jy = dyn.observable_trajectory(traj, basis, "jy")
        jz = dyn.observable_trajectory(traj, basis, "jz")
        writer.csv(f"observables_state{i}.csv", runio.OBSERVABLE_HEADER,
                   runio.observable_rows(t_grid, jx, jy, jz))
        if cfg["dump_coefficients"]:
            writer.csv(
                f"coefficients_state{i}.csv",
                runio.coefficient_header(basis.labels()),
                runio.coefficient_rows(t_grid, traj.coefficients),
            )
    extra = {"states": [{"theta": t, "phi": p} for t, p in states]}
    try:
        ss = steady_state(liouv, decomp)
        ss_traj = dyn.Trajectory(times=np.zeros(1), coefficients=ss[None, :])
        extra["steady_observables"] = {
            name: float(dyn.observable_trajectory(ss_traj, basis, name)[0])
            for name in ("jx", "jy", "jz")
        }
    except DegenerateSteadyStateError:
        extra["steady_observables"] = None
    if len(states) >= 2:
        report = dyn.universality_experiment(liouv, basis, rhos, t_grid, decomp=decomp)
        payload = {
            "trajectories": report["trajectories"],
            "pairs": report["pairs"],
            "late_window_start_index": report["late_window_start_index"],
        }
        writer.json("universality.json", payload)
    writer.finish(extra=extra)
    return 0


def cmd_validate(cfg) -> int:
    report = run_suite(
        cfg["suite"],
        n_spins=cfg["n_spins"],
        seed=cfg["seed"],
        j_max=cfg["j_max"],
        samples_trace=cfg["samples_trace"],
        samples_equivalence=cfg["samples_equivalence"],
        samples_hn=cfg["samples_hn"],
        inject=cfg["inject"],
    )
    writer = runio.RunWriter(cfg["out_dir"], "validate", _public_config(cfg))
    writer.json("validation_report.json", report)
    writer.finish(extra={"all_passed": report["all_passed"]})
    for check in report["checks"]:
        if not check["passed"]:
            print(f"FAILED: {check['name']} measured={check['measured']:.3e} "
                  f"tolerance={check['tolerance']:.3e}", file=sys.stderr)
    return 0 if report["all_passed"] else 1


COMMANDS = {
    "basis": cmd_basis,
    "spectrum": cmd_spectrum,
    "hoppings": cmd_hoppings,
    "localizer-x": cmd_localizer_x,
    "localizer-plane": cmd_localizer_plane,
    "kappa-sweep": cmd_kappa_sweep,
    "modes": cmd_modes,
    "evolve": cmd_evolve,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "exit_code": 2}), file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "exit_code": 2}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
