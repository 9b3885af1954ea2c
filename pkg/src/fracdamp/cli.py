"""Batch front-end: spectrum | simulate | resolvent | verify.

Each subcommand reads one flat key = value config (all keys optional),
writes delimited output plus rendered figures into --out, and exits with
0 on success, 1 on numerical failure, 2 on usage or validation errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .diffusive import GridCertificationError, build_xi_grid
from .params import ModelParams
from .pde import (
    SimulationDiverged,
    assemble_generator,
    build_spatial_grid,
    fit_decay,
    profile_gaussian,
    profile_lowest_mode,
    profile_polynomial,
    simulate,
)
from .resolvent import ResolventSolveError, peak_scan
from .spectrum import case_constants, compute_spectrum
from .verify import run_all_checks

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2


def _set_thread_env(threads: int) -> None:
    if threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)


def _write_json(path, payload, cfg: RunConfig) -> None:
    payload = dict(payload)
    payload["artifact_version"] = __version__
    payload["config"] = {k: v for k, v in cfg.header_items()}
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_spectrum(cfg: RunConfig) -> int:
    from .reporting import save_spectrum_figures, write_csv

    params = cfg.model_params()
    run = compute_spectrum(params, cfg.k_min, cfg.k_max)
    header = cfg.header_items()
    rows = [(r.k, r.gamma.real, r.gamma.imag, r.lam.real, r.lam.imag,
             r.residual, r.lam_asym.real, r.lam_asym.imag, r.rel_gap,
             r.case_tag) for r in run.records]
    write_csv(os.path.join(cfg.out_dir, "spectrum.csv"), header,
              ["k", "re_gamma", "im_gamma", "re_lambda", "im_lambda",
               "residual", "re_lambda_asym", "im_lambda_asym", "rel_gap",
               "case_tag"], rows)
    write_csv(os.path.join(cfg.out_dir, "asym_gap.csv"), header,
              ["k", "rel_gap"], [(r.k, r.rel_gap) for r in run.records])
    if cfg.figures and run.records:
        save_spectrum_figures(run.records, cfg.out_dir)
    for k, msg in run.lost:
        print(f"root lost at k={k}: {msg}", file=sys.stderr)
    for pair in run.collisions:
        print(f"collision between k={pair[0]} and k={pair[1]}", file=sys.stderr)
    print(f"spectrum: {len(run.records)} roots, {len(run.lost)} lost, "
          f"{len(run.collisions)} collisions -> {cfg.out_dir}")
    return EXIT_OK if not run.lost and not run.collisions else EXIT_NUMERICAL


def _initial_profile(cfg: RunConfig, params: ModelParams, grid):
    if cfg.profile == "gaussian":
        return np.array([profile_gaussian(x) for x in grid.x], dtype=complex)
    if cfg.profile == "polynomial":
        return np.array([profile_polynomial(x) for x in grid.x], dtype=complex)
    if cfg.profile == "lowest_mode":
        return profile_lowest_mode(params, grid)
    data = np.loadtxt(cfg.profile, delimiter=",", comments="#", skiprows=0)
    if data.ndim != 2 or data.shape[1] < 3:
        raise ConfigError("profile csv needs columns x, re_v0, im_v0")
    return np.interp(grid.x, data[:, 0], data[:, 1]) \
        + 1j * np.interp(grid.x, data[:, 0], data[:, 2])


def cmd_simulate(cfg: RunConfig) -> int:
    from .reporting import save_trace_figure, write_csv

    params = cfg.model_params()
    grid = build_spatial_grid(params.alpha, cfg.n_cells)
    dgrid = None
    if params.damped and not params.direct_damping:
        try:
            dgrid = build_xi_grid(params, cfg.n_modes,
                                  (cfg.lambda_min, cfg.lambda_max),
                                  tol=cfg.cert_tol)
        except GridCertificationError as exc:
            print(f"diffusive grid: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
    v0 = _initial_profile(cfg, params, grid)
    try:
        trace = simulate(params, v0, cfg.T, cfg.dt, grid, dgrid,
                         stride=cfg.stride)
    except SimulationDiverged as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    fit = None
    fit_payload = {"model": None, "exponent": None, "r_squared": None,
                   "window": None, "conserved": not params.damped}
    if params.damped:
        model = cfg.fit_model
        if model == "auto":
            model = ("exponential"
                     if params.direct_damping
                     or params.alpha_tilde >= params.threshold
                     else "polynomial")
        try:
            fit = fit_decay(trace, model)
            fit_payload.update(model=fit.model, exponent=fit.rate,
                               r_squared=fit.r_squared,
                               window=list(fit.window))
        except ValueError as exc:
            fit_payload["error"] = str(exc)
    _write_json(os.path.join(cfg.out_dir, "fit.json"), fit_payload, cfg)

    resid = np.zeros_like(trace.t)
    if fit is not None:
        mask = (trace.t >= fit.window[0]) & (trace.t > 0) & (trace.energy > 0)
        x = np.log(trace.t[mask]) if fit.model == "polynomial" else trace.t[mask]
        y = np.log(trace.energy[mask])
        coef = np.polyfit(x, y, 1)
        resid[mask] = y - np.polyval(coef, x)
    rows = list(zip(trace.t, trace.energy, trace.dissipation, resid))
    write_csv(os.path.join(cfg.out_dir, "trace.csv"), cfg.header_items(),
              ["t", "energy", "dissipation", "fit_residual"], rows)
    if cfg.figures:
        save_trace_figure(trace, fit, cfg.out_dir)

    de = np.diff(trace.energy)
    monotone = bool(np.all(de <= 1e-12 * trace.energy[0])) or not params.damped
    print(f"simulate: {len(trace)} samples, E(T)/E(0) = "
          f"{trace.energy[-1] / trace.energy[0]:.4e} -> {cfg.out_dir}")
    return EXIT_OK if monotone else EXIT_NUMERICAL


def cmd_resolvent(cfg: RunConfig) -> int:
    from .reporting import save_scan_figure, write_csv

    params = cfg.model_params()
    grid = build_spatial_grid(params.alpha, cfg.n_cells)
    dgrid = None
    if params.damped and not params.direct_damping:
        try:
            dgrid = build_xi_grid(
                params, cfg.n_modes,
                (min(cfg.beta_min, 1.0), 3.0 * cfg.beta_max),
                tol=cfg.cert_tol)
        except GridCertificationError as exc:
            print(f"diffusive grid: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
    gen = assemble_generator(grid, dgrid, params)
    # mode indices whose frequencies Im(lambda_k) ~ C0^2 (k pi)^2 span the band
    c0 = abs(case_constants(params).C0) if params.damped else (2 - params.alpha) / 2
    k_lo = max(1, math.floor(math.sqrt(cfg.beta_min) / (c0 * math.pi)))
    k_hi = min(500, math.ceil(math.sqrt(cfg.beta_max) / (c0 * math.pi)))
    if k_hi - k_lo + 1 < 5:
        print(f"resolvent: band [{cfg.beta_min:g}, {cfg.beta_max:g}] spans "
              f"only modes {k_lo}..{k_hi}; need at least 5", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = peak_scan(gen, params, k_lo, k_hi, seed=cfg.seed)
    except (ResolventSolveError, ValueError) as exc:
        print(f"resolvent: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    rows = [(s.beta, s.norm, s.converged, s.is_peak) for s in result.samples]
    write_csv(os.path.join(cfg.out_dir, "scan.csv"), cfg.header_items(),
              ["beta", "norm", "converged", "is_peak"], rows)
    gap = params.nu - params.alpha_tilde + 0.5
    _write_json(os.path.join(cfg.out_dir, "slope.json"),
                {"slope": result.slope,
                 "expected_slope": max(gap, 0.0),
                 "regime": "polynomial" if gap > 0 else "bounded"}, cfg)
    if cfg.figures:
        save_scan_figure(result.samples, result.slope, cfg.out_dir)
    print(f"resolvent: envelope slope {result.slope:.4f} over "
          f"{len(result.peaks)} peaks -> {cfg.out_dir}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = run_all_checks(cfg)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.detail}")
        failures += 0 if r.passed else 1
    print(f"verify: {len(results) - failures}/{len(results)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdamp",
        description="spectral, time-domain and resolvent studies of a "
                    "boundary-damped degenerate dispersive model")
    parser.add_argument("--version", action="version",
                        version=f"fracdamp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("spectrum", "eigenvalues by characteristic-equation refinement"),
            ("simulate", "time-domain energy decay run"),
            ("resolvent", "resolvent-norm scan along the imaginary axis"),
            ("verify", "run the identity/property check suite")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", metavar="PATH", default=None,
                         help="key = value config file")
        cmd.add_argument("--out", metavar="DIR", default=None,
                         help="output directory (default: out)")
        cmd.add_argument("--seed", metavar="N", type=int, default=None,
                         help="seed for randomized checks and start vectors")
        cmd.add_argument("--threads", metavar="N", type=int, default=None,
                         help="BLAS thread cap (0 = leave unset)")
    return parser


_DISPATCH = {
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "resolvent": cmd_resolvent,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"out_dir": args.out, "seed": args.seed,
                 "threads": args.threads}
    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _set_thread_env(cfg.threads)
    try:
        return _DISPATCH[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
