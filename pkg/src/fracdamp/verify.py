"""Named property checks aggregated by the ``verify`` subcommand.

Each check returns (passed, detail); the runner prints one line per check
and the command exits nonzero if any fails.  The checks mirror the
identities the solver is built on: Bessel function identities, the
closed-form relaxation-kernel integral, the realized fractional operator
against its convolution oracle, the discrete energy identities, and the
endpoint trace inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .bessel import bessel_j, bessel_j_prime
from .config import RunConfig
from .diffusive import (
    GridCertificationError,
    build_xi_grid,
    fractional_integral_direct,
    run_diffusive_pipeline,
)
from .params import ModelParams, bessel_order_of
from .pde import (
    assemble_generator,
    build_spatial_grid,
    embedding_check,
    profile_gaussian,
    simulate,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_bessel_derivative_identity(cfg: RunConfig) -> CheckResult:
    worst = 0.0
    for alpha in np.linspace(0.1, 0.9, 9):
        nu = bessel_order_of(alpha)
        for z in np.geomspace(0.5, 100.0, 20):
            h = 0.01 * min(1.0, z * z)
            jp = (-bessel_j(nu, z + 2 * h) + 8 * bessel_j(nu, z + h)
                  - 8 * bessel_j(nu, z - h) + bessel_j(nu, z - 2 * h)) / (12 * h)
            err = abs(z * jp - (nu * bessel_j(nu, z) - z * bessel_j(nu + 1, z)))
            worst = max(worst, err / (1.0 + abs(bessel_j(nu, z))))
    return CheckResult("bessel-derivative-identity", worst < 1e-7,
                       f"worst residual {worst:.2e} (tol 1e-7)")


def check_bessel_recurrence(cfg: RunConfig) -> CheckResult:
    worst = 0.0
    for alpha in np.linspace(0.1, 0.9, 9):
        nu = bessel_order_of(alpha)
        for z in np.geomspace(0.5, 100.0, 20):
            lhs = bessel_j(nu - 1, z) + bessel_j(nu + 1, z)
            rhs = 2.0 * nu / z * bessel_j(nu, z)
            worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-30))
    return CheckResult("bessel-recurrence", worst < 1e-7,
                       f"worst relative residual {worst:.2e} (tol 1e-7)")


def check_bessel_wronskian(cfg: RunConfig) -> CheckResult:
    worst = 0.0
    for alpha in np.linspace(0.1, 0.9, 9):
        nu = bessel_order_of(alpha)
        for z in np.geomspace(0.5, 100.0, 20):
            w = (bessel_j(nu, z) * bessel_j_prime(-nu, z)
                 - bessel_j_prime(nu, z) * bessel_j(-nu, z))
            target = -2.0 * math.sin(nu * math.pi) / (math.pi * z)
            worst = max(worst, abs(w - target) / abs(target))
    return CheckResult("bessel-wronskian", worst < 1e-7,
                       f"worst relative residual {worst:.2e} (tol 1e-7)")


def check_bessel_half_integer(cfg: RunConfig) -> CheckResult:
    errs = [
        abs(bessel_j(0.5, math.pi / 2) - 2.0 / math.pi),
        abs(bessel_j(0.5, math.pi)),
        abs(bessel_j(-0.5, math.pi) + math.sqrt(2.0) / math.pi),
        abs(bessel_j(0.5, 50.0)
            - math.sqrt(2.0 / (50.0 * math.pi)) * math.sin(50.0)),
    ]
    worst = max(errs)
    return CheckResult("bessel-half-integer", worst < 1e-12,
                       f"worst absolute error {worst:.2e} (tol 1e-12)")


def check_weighted_l2_identity(cfg: RunConfig) -> CheckResult:
    nu = bessel_order_of(0.5)
    worst = 0.0
    for a in (1.0, 5.0):
        lhs = 2.0 * a * a * quad(
            lambda t: t * bessel_j(nu, a * t).real ** 2, 0.0, 1.0, limit=200)[0]
        j = bessel_j(nu, a).real
        d = (nu * bessel_j(nu, a) - a * bessel_j(nu + 1, a)).real
        rhs = (a * a - nu * nu) * j * j + d * d
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return CheckResult("bessel-weighted-l2-identity", worst < 1e-6,
                       f"worst relative error {worst:.2e} (tol 1e-6)")


def check_boundary_trace_scaling(cfg: RunConfig) -> CheckResult:
    alpha = 0.5
    nu = bessel_order_of(alpha)
    c = 2.0 / (2.0 - alpha)
    mus = np.geomspace(10.0, 200.0, 9)
    norms = []
    for mu in mus:
        val = quad(lambda x: x ** (1 - alpha)
                   * bessel_j(nu, c * mu * x ** ((2 - alpha) / 2)).real ** 2,
                   0.0, 1.0, limit=400)[0]
        norms.append(math.sqrt(val))
    slope = float(np.polyfit(np.log(mus), np.log(norms), 1)[0])
    return CheckResult("boundary-trace-scaling", -0.6 < slope < -0.4,
                       f"log-log slope {slope:.3f} (band [-0.6, -0.4])")


def check_kernel_closed_form(cfg: RunConfig) -> CheckResult:
    worst = 0.0
    for at in (0.25, 0.5, 0.75):
        for eta in (0.5, 1.0):
            p = ModelParams(alpha=cfg.alpha, alpha_tilde=at, eta=eta,
                            rho=max(cfg.rho, 1.0))
            try:
                g = build_xi_grid(p, cfg.n_modes, (0.1, 100.0), tol=1e-4)
            except GridCertificationError as exc:
                return CheckResult(
                    "kernel-closed-form", False,
                    f"certification failed at alpha_tilde={at} eta={eta}: "
                    f"error {exc.achieved:.2e} at lambda={exc.worst_lambda:.4g}")
            worst = max(worst, g.certified_error)
    return CheckResult("kernel-closed-form", worst < 1e-4,
                       f"worst certified error {worst:.2e} (tol 1e-4)")


def check_fractional_realization(cfg: RunConfig) -> CheckResult:
    p = ModelParams(alpha=cfg.alpha, alpha_tilde=0.3, eta=0.5, rho=1.0)
    T, dt = 5.0, 1e-3
    n = round(T / dt)
    u = np.sin(dt * (np.arange(n) + 0.5)).astype(complex)
    n_modes = max(cfg.n_modes, 300)
    try:
        g = build_xi_grid(p, n_modes, (1.0 / T ** 2, 10.0 / dt))
    except GridCertificationError as exc:
        return CheckResult("fractional-realization", False,
                           f"grid failed: {exc}")
    gap = float(np.max(np.abs(run_diffusive_pipeline(p, g, u, dt)
                              - fractional_integral_direct(u, dt, p))))
    return CheckResult("fractional-realization", gap < 1e-3,
                       f"sup gap {gap:.2e} vs convolution oracle (tol 1e-3)")


def check_energy_balance(cfg: RunConfig) -> CheckResult:
    p = ModelParams(alpha=cfg.alpha, alpha_tilde=0.5, eta=1.0, rho=1.0)
    g = build_spatial_grid(p.alpha, 100)
    dg = build_xi_grid(p, 128, (0.1, 1e3), tol=1e-3)
    dt = 1e-4
    tr = simulate(p, profile_gaussian, T=0.2, dt=dt, grid=g, dgrid=dg)
    de = np.diff(tr.energy)
    dbar = 0.5 * (tr.dissipation[1:] + tr.dissipation[:-1])
    resid = float(np.abs(de - dt * dbar).max())
    mono = bool(np.all(de <= 1e-12 * tr.energy[0]))
    ok = resid < 1e-8 * tr.energy[0] and mono
    return CheckResult("energy-balance", ok,
                       f"per-step residual {resid:.2e} "
                       f"(tol {1e-8 * tr.energy[0]:.2e}), monotone={mono}")


def check_energy_conservation(cfg: RunConfig) -> CheckResult:
    p = ModelParams(alpha=cfg.alpha, alpha_tilde=1.0, eta=0.0, rho=0.0)
    g = build_spatial_grid(p.alpha, 120)
    tr = simulate(p, profile_gaussian, T=1.0, dt=1e-3, grid=g)
    drift = float(np.ptp(tr.energy) / tr.energy[0])
    return CheckResult("energy-conservation", drift < 1e-10,
                       f"relative drift {drift:.2e} over 1000 steps (tol 1e-10)")


def check_dissipation_identity(cfg: RunConfig) -> CheckResult:
    p = ModelParams(alpha=cfg.alpha, alpha_tilde=0.5, eta=1.0, rho=1.0)
    g = build_spatial_grid(p.alpha, 80)
    dg = build_xi_grid(p, 96, (0.1, 1e3), tol=1e-2)
    gen = assemble_generator(g, dg, p)
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(10):
        u = rng.standard_normal(gen.size) + 1j * rng.standard_normal(gen.size)
        st = gen.unpack(u, 0.0)
        lhs = float(np.real(np.sum(gen.weights * (gen.matrix @ u) * np.conj(u))))
        rhs = gen.dissipation_rate(st)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-30))
    return CheckResult("dissipation-identity", worst < 1e-12,
                       f"worst relative mismatch {worst:.2e} (tol 1e-12)")


def check_embedding_constant(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed)
    worst = -math.inf
    for alpha in (0.25, 0.5, 0.75):
        g = build_spatial_grid(alpha, 100)
        for _ in range(1000):
            v = rng.standard_normal(g.x.size) + 1j * rng.standard_normal(g.x.size)
            worst = max(worst, embedding_check(g, v))
    return CheckResult("embedding-constant", worst <= 0.0,
                       f"worst residual {worst:.3e} over 3000 trials (must be <= 0)")


ALL_CHECKS = (
    check_bessel_derivative_identity,
    check_bessel_recurrence,
    check_bessel_wronskian,
    check_bessel_half_integer,
    check_weighted_l2_identity,
    check_boundary_trace_scaling,
    check_kernel_closed_form,
    check_fractional_realization,
    check_energy_balance,
    check_energy_conservation,
    check_dissipation_identity,
    check_embedding_constant,
)


def run_all_checks(cfg: RunConfig):
    return [check(cfg) for check in ALL_CHECKS]
