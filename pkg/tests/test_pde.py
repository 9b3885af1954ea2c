"""Time-domain checks: discrete structure of the generator, conservation,
the energy balance, decay fitting, and cross-checks against the spectrum."""

import math

import numpy as np
import pytest
from scipy import sparse

from fracdamp.diffusive import build_xi_grid
from fracdamp.params import ModelParams
from fracdamp.pde import (
    EnergyTrace,
    SimulationDiverged,
    TimeStepper,
    assemble_generator,
    build_spatial_grid,
    eigenmode_profile,
    embedding_check,
    fit_decay,
    profile_gaussian,
    profile_lowest_mode,
    simulate,
)
from fracdamp.spectrum import refine_root, seed_root


def _fractional_setup(n_cells=100, n_modes=128, at=0.5, eta=1.0, rho=1.0,
                      tol=1e-3):
    p = ModelParams(alpha=0.5, alpha_tilde=at, eta=eta, rho=rho)
    g = build_spatial_grid(0.5, n_cells)
    dg = build_xi_grid(p, n_modes, (0.1, 1e3), tol=tol)
    return p, g, dg


def test_grid_grading_and_weights():
    g = build_spatial_grid(0.5, 100)
    assert g.x[0] == 0.0 and g.x[-1] == 1.0
    assert np.all(np.diff(g.x) > 0.0)
    assert g.x[1] == pytest.approx(0.01 ** (4.0 / 3.0), rel=1e-14)
    assert g.cell_w.sum() == pytest.approx(1.0, abs=1e-12)
    assert g.l2_norm(g.x) ** 2 == pytest.approx(1.0 / 3.0, abs=1e-4)
    # alpha -> 0 tends to the uniform mesh
    g0 = build_spatial_grid(1e-12, 50)
    assert np.allclose(g0.x, np.linspace(0, 1, 51), atol=1e-9)
    with pytest.raises(ValueError):
        build_spatial_grid(0.5, 8)


def test_undamped_generator_is_skew():
    p = ModelParams(alpha=0.5, alpha_tilde=1.0, eta=0.0, rho=0.0)
    g = build_spatial_grid(0.5, 80)
    gen = assemble_generator(g, None, p)
    a = gen.matrix.toarray()
    w = np.diag(gen.weights)
    assert np.abs(w @ a + a.conj().T @ w).max() < 1e-12


def test_quadratic_form_matches_dissipation():
    p, g, dg = _fractional_setup()
    gen = assemble_generator(g, dg, p)
    rng = np.random.default_rng(7)
    for _ in range(5):
        u = rng.standard_normal(gen.size) + 1j * rng.standard_normal(gen.size)
        st = gen.unpack(u, 0.0)
        lhs = float(np.real(np.sum(gen.weights * (gen.matrix @ u) * np.conj(u))))
        rhs = gen.dissipation_rate(st)
        assert lhs == pytest.approx(rhs, rel=1e-12)
    # direct-damping branch
    pd = ModelParams(alpha=0.5, alpha_tilde=1.0, eta=0.0, rho=0.7)
    gend = assemble_generator(g, None, pd)
    u = rng.standard_normal(gend.size) + 1j * rng.standard_normal(gend.size)
    lhs = float(np.real(np.sum(gend.weights * (gend.matrix @ u) * np.conj(u))))
    assert lhs == pytest.approx(-0.7 * abs(u[0]) ** 2, rel=1e-12)


def test_constants_in_flux_kernel():
    p, g, dg = _fractional_setup()
    gen = assemble_generator(g, dg, p)
    u = np.zeros(gen.size, dtype=complex)
    u[:gen.nv] = 1.0
    out = gen.matrix @ u
    assert np.abs(out[1:gen.nv]).max() < 1e-10       # interior rows annihilate 1
    assert np.abs(out[gen.nv:] - gen.dgrid.mu).max() < 1e-12  # phi driven by v(0)


def test_energy_values():
    p, g, dg = _fractional_setup()
    gen = assemble_generator(g, dg, p)
    zero = gen.state_from(np.zeros(gen.nv))
    assert gen.energy(zero) == 0.0
    ones = gen.state_from(np.ones(gen.nv))
    assert gen.energy(ones) == pytest.approx(0.5, abs=1e-12)
    rng = np.random.default_rng(3)
    u = rng.standard_normal(gen.size) + 1j * rng.standard_normal(gen.size)
    st = gen.unpack(u, 0.0)
    independent = 0.5 * np.sum(g.cell_w * np.abs(st.v) ** 2) \
        + 0.5 * p.zeta * 2.0 * np.sum(dg.weights * np.abs(st.phi) ** 2)
    assert gen.energy(st) == pytest.approx(float(independent), rel=1e-12)


def test_dissipation_single_mode():
    p, g, dg = _fractional_setup()
    gen = assemble_generator(g, dg, p)
    phi = np.zeros(gen.nphi, dtype=complex)
    phi[11] = 1.0
    st = gen.state_from(np.zeros(gen.nv), phi)
    expect = -p.zeta * 2.0 * dg.weights[11] * (dg.nodes[11] ** 2 + p.eta)
    assert gen.dissipation_rate(st) == pytest.approx(expect, rel=1e-12)
    assert gen.dissipation_rate(gen.state_from(np.zeros(gen.nv))) == 0.0


def test_identity_step_for_zero_generator():
    p, g, dg = _fractional_setup(n_cells=32, n_modes=64, tol=1e-1)
    gen = assemble_generator(g, dg, p)
    gen.matrix = sparse.csr_matrix((gen.size, gen.size), dtype=complex)
    stepper = TimeStepper(gen, 0.1)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(gen.size) + 1j * rng.standard_normal(gen.size)
    out = stepper.step(gen.unpack(u, 0.0))
    assert np.allclose(out.pack(), u, rtol=0, atol=1e-14)


def test_conservative_run_preserves_energy():
    p = ModelParams(alpha=0.5, alpha_tilde=1.0, eta=0.0, rho=0.0)
    g = build_spatial_grid(0.5, 120)
    tr = simulate(p, profile_gaussian, T=1.0, dt=1e-3, grid=g)
    drift = abs(tr.energy[-1] - tr.energy[0]) / tr.energy[0]
    assert drift < 1e-10
    assert np.ptp(tr.energy) / tr.energy[0] < 1e-10


def test_damped_run_monotone_and_balanced():
    p, g, dg = _fractional_setup()
    tr = simulate(p, profile_gaussian, T=0.4, dt=1e-4, grid=g, dgrid=dg)
    de = np.diff(tr.energy)
    assert np.all(de <= 1e-12 * tr.energy[0])
    assert tr.energy[-1] < tr.energy[0]
    dbar = 0.5 * (tr.dissipation[1:] + tr.dissipation[:-1])
    resid = np.abs(de - 1e-4 * dbar)
    assert resid.max() < 1e-8 * tr.energy[0]


def test_balance_residual_third_order_in_dt():
    p, g, dg = _fractional_setup()
    worst = {}
    for dt in (4e-4, 2e-4):
        tr = simulate(p, profile_gaussian, T=0.1, dt=dt, grid=g, dgrid=dg)
        de = np.diff(tr.energy)
        dbar = 0.5 * (tr.dissipation[1:] + tr.dissipation[:-1])
        worst[dt] = np.abs(de - dt * dbar).max()
    assert worst[4e-4] / worst[2e-4] == pytest.approx(8.0, rel=0.35)


def test_nan_detection():
    p, g, dg = _fractional_setup(n_cells=32, n_modes=64, tol=1e-1)
    bad = np.zeros(g.x.size, dtype=complex)
    bad[3] = np.nan
    with pytest.raises(SimulationDiverged):
        simulate(p, bad, T=0.01, dt=1e-3, grid=g, dgrid=dg)


def test_fit_decay_synthetic():
    ts = np.linspace(0.5, 20.0, 300)
    poly = EnergyTrace(t=ts, energy=ts ** -3.0, dissipation=np.zeros_like(ts))
    f = fit_decay(poly, "polynomial", window=(0.5, 20.0))
    assert f.rate == pytest.approx(-3.0, abs=1e-6)
    assert f.r_squared > 0.999999
    expo = EnergyTrace(t=ts, energy=np.exp(-2.0 * ts), dissipation=np.zeros_like(ts))
    f = fit_decay(expo, "exponential", window=(0.5, 20.0))
    assert f.rate == pytest.approx(-2.0, abs=1e-9)
    with pytest.raises(ValueError):
        fit_decay(poly, "polynomial", window=(19.9, 20.0))
    with pytest.raises(ValueError):
        fit_decay(poly, "parabolic")


def test_default_window_starts_after_tenfold_drop():
    ts = np.linspace(0.01, 30.0, 500)
    tr = EnergyTrace(t=ts, energy=np.exp(-ts), dissipation=np.zeros_like(ts))
    f = fit_decay(tr, "exponential")
    assert f.window[0] >= math.log(10.0) - 0.2


def test_embedding_bound():
    for alpha in (0.25, 0.5, 0.75):
        g = build_spatial_grid(alpha, 100)
        assert embedding_check(g, np.ones(g.x.size)) < 0.0
        assert embedding_check(g, g.x.astype(complex)) < 0.0
        rng = np.random.default_rng(11)
        for _ in range(200):
            v = rng.standard_normal(g.x.size) + 1j * rng.standard_normal(g.x.size)
            assert embedding_check(g, v) <= 0.0


def test_eigenmode_decays_at_spectral_rate():
    p = ModelParams(alpha=0.5, alpha_tilde=1.0, eta=0.0, rho=0.05)
    g = build_spatial_grid(0.5, 400)
    rec = refine_root(p, seed_root(p, 1))
    v0 = eigenmode_profile(p, g, rec.gamma)
    tr = simulate(p, v0, T=3.0, dt=5e-4, grid=g)
    fit = fit_decay(tr, "exponential", window=(0.0, 3.0))
    assert fit.rate == pytest.approx(2.0 * rec.lam.real, rel=0.1)


def test_lowest_mode_oscillates_without_decay():
    p = ModelParams(alpha=0.5, alpha_tilde=1.0, eta=0.0, rho=0.0)
    g = build_spatial_grid(0.5, 200)
    v0 = profile_lowest_mode(p, g)
    tr = simulate(p, v0, T=0.3, dt=1e-3, grid=g)
    assert np.ptp(tr.energy) / tr.energy[0] < 1e-10


def test_second_order_refinement():
    p = ModelParams(alpha=0.5, alpha_tilde=0.5, eta=1.0, rho=1.0)
    dg = build_xi_grid(p, 240, (0.05, 1e4))
    e = {}
    for lvl, (n, dt) in enumerate([(100, 1e-3), (200, 5e-4), (400, 2.5e-4)]):
        tr = simulate(p, profile_gaussian, T=0.5, dt=dt,
                      grid=build_spatial_grid(0.5, n), dgrid=dg)
        e[lvl] = tr.energy[-1]
    ratio = abs(e[0] - e[1]) / abs(e[1] - e[2])
    assert 2.5 < ratio < 8.0


def test_direct_damping_limit():
    g = build_spatial_grid(0.5, 150)
    pd = ModelParams(alpha=0.5, alpha_tilde=1.0, eta=1.0, rho=1.0)
    ed = simulate(pd, profile_gaussian, T=2.0, dt=2e-3, grid=g).energy[-1]
    gaps = {}
    for at, n in [(0.95, 400), (0.99, 800)]:
        pf = ModelParams(alpha=0.5, alpha_tilde=at, eta=1.0, rho=1.0)
        dgf = build_xi_grid(pf, n, (0.05, 1e4), tol=5e-3)
        ef = simulate(pf, profile_gaussian, T=2.0, dt=2e-3, grid=g, dgrid=dgf).energy[-1]
        gaps[at] = abs(ef - ed) / ed
    assert gaps[0.99] < gaps[0.95]
    assert gaps[0.99] < 0.05
