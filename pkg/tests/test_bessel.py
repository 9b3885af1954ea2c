"""Bessel kernel checks: closed forms, a 50-digit reference, and the
classical identities the rest of the package leans on."""

import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracdamp.bessel import (
    R_SWITCH,
    BesselOrder,
    BesselError,
    BranchCutError,
    SeriesOverflowError,
    bessel_j,
    bessel_j_asymptotic,
    bessel_j_prime,
    bessel_j_series,
)
from fracdamp.params import bessel_order_of

# frozen 50-digit reference values (mpmath.besselj at dps=50)
REF_SERIES_POINT = 0.452226190501451731532 - 0.04481772781941480638943j  # nu=0.35, z=2+0.1i
REF_ASYM_REAL = 0.06920294281885805208033  # nu=1/3, z=40
REF_ASYM_COMPLEX = -0.5156558293038655582204 + 0.1784942687350093717928j  # nu=0.4, z=30+2i
REF_HYBRID = 0.2009698764030282262136  # nu=1/3, z=14.2
REF_SMALL = 0.1103119042952265566263  # nu=5/3, z=0.7


def test_order_arithmetic_is_exact():
    order = BesselOrder.from_alpha(0.5)
    assert order.value == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert order.shifted(3).shifted(-3).value == order.value
    assert order.shifted(2).base == order.base
    neg = order.negated()
    assert neg.value == -order.value
    assert neg.shifted(1).value == 1.0 - order.value


def test_half_integer_closed_forms():
    z = math.pi / 2.0
    assert bessel_j(0.5, z) == pytest.approx(2.0 / math.pi, abs=1e-12)
    assert abs(bessel_j(0.5, math.pi)) < 1e-15  # sin(pi) = 0
    assert bessel_j(-0.5, math.pi) == pytest.approx(
        -math.sqrt(2.0) / math.pi, abs=1e-12)
    # at half-integer order the expansion corrections all vanish
    assert bessel_j_asymptotic(0.5, 50.0) == pytest.approx(
        math.sqrt(2.0 / (50.0 * math.pi)) * math.sin(50.0), abs=1e-14)


def test_series_against_reference():
    val = bessel_j_series(0.35, 2.0 + 0.1j)
    assert abs(val - REF_SERIES_POINT) < 1e-13 * abs(REF_SERIES_POINT)
    assert abs(bessel_j_series(5.0 / 3.0, 0.7) - REF_SMALL) < 1e-13


def test_series_vanishes_at_origin_for_positive_order():
    assert bessel_j_series(1.0 / 3.0, 0.0) == 0.0
    assert abs(bessel_j_series(1.0 / 3.0, 1e-12)) < 1e-4
    with pytest.raises(BesselError):
        bessel_j_series(-1.0 / 3.0, 0.0)


def test_series_overflow_signals_expansion_branch():
    with pytest.raises(SeriesOverflowError):
        bessel_j_series(1.0 / 3.0, 80.0, max_terms=20)


def test_asymptotic_against_reference():
    assert abs(bessel_j_asymptotic(1.0 / 3.0, 40.0) - REF_ASYM_REAL) \
        < 1e-9 * abs(REF_ASYM_REAL)
    val = bessel_j_asymptotic(0.4, 30.0 + 2.0j)
    assert abs(val - REF_ASYM_COMPLEX) < 1e-9 * abs(REF_ASYM_COMPLEX)
    # magnitude carries the e^{|Im z|} factor and nothing worse
    assert 0.01 < abs(val) * math.exp(-2.0) < 1.0


def test_asymptotic_rejects_cut_and_large_imag():
    with pytest.raises(BranchCutError):
        bessel_j_asymptotic(1.0 / 3.0, 40.0 * cmath.exp(1j * (math.pi - 0.05)))
    with pytest.raises(BesselError):
        bessel_j_asymptotic(1.0 / 3.0, 30.0 + 60.0j)


def test_order_range_guard():
    with pytest.raises(ValueError):
        bessel_j(4.5, 1.0)
    with pytest.raises(ValueError):
        bessel_j(-1.0, 1.0)


def test_hybrid_cross_branch_agreement():
    # both branches evaluated at the same point: the jump across the switch
    # is the branch disagreement, not the function's own variation
    for nu in [1.0 / 3.0, -1.0 / 3.0, 0.45, 4.0 / 3.0]:
        for phase in [0.0, 0.05, -0.1]:
            z = R_SWITCH * cmath.exp(1j * phase)
            below = bessel_j_series(nu, z)
            above = bessel_j_asymptotic(nu, z)
            assert abs(below - above) < 1e-9 * abs(below)
    assert abs(bessel_j(1.0 / 3.0, 14.2) - REF_HYBRID) < 1e-10 * abs(REF_HYBRID)


def _z_grid(n=20):
    return np.geomspace(0.5, 100.0, n)


def test_derivative_identity_on_alpha_grid():
    # z J'(z) = nu J(z) - z J_{nu+1}(z); J' from a 4th-order central stencil.
    # Step shrinks with z below 1 where the z^nu singularity inflates the
    # higher derivatives that control stencil truncation.
    for alpha in np.linspace(0.1, 0.9, 9):
        nu = bessel_order_of(alpha)
        for z in _z_grid():
            h = 0.01 * min(1.0, z * z)
            jp = (-bessel_j(nu, z + 2 * h) + 8 * bessel_j(nu, z + h)
                  - 8 * bessel_j(nu, z - h) + bessel_j(nu, z - 2 * h)) / (12 * h)
            lhs = z * jp
            rhs = nu * bessel_j(nu, z) - z * bessel_j(nu + 1.0, z)
            assert abs(lhs - rhs) < 1e-8 * (1.0 + abs(bessel_j(nu, z)))


def test_three_term_recurrence():
    for alpha in np.linspace(0.1, 0.9, 9):
        nu = bessel_order_of(alpha)
        for z in _z_grid():
            lhs = bessel_j(nu - 1.0, z) + bessel_j(nu + 1.0, z)
            rhs = 2.0 * nu / z * bessel_j(nu, z)
            scale = abs(lhs) + abs(rhs) + 1e-30
            assert abs(lhs - rhs) < 1e-8 * scale


def test_wronskian():
    # J_nu J'_{-nu} - J'_nu J_{-nu} = -2 sin(nu pi) / (pi z)
    for alpha in np.linspace(0.1, 0.9, 9):
        nu = bessel_order_of(alpha)
        for z in _z_grid():
            w = (bessel_j(nu, z) * bessel_j_prime(-nu, z)
                 - bessel_j_prime(nu, z) * bessel_j(-nu, z))
            target = -2.0 * math.sin(nu * math.pi) / (math.pi * z)
            assert abs(w - target) < 1e-7 * abs(target)


def test_weighted_l2_identity():
    # 2 a^2 int_0^x t J(at)^2 dt = (a^2 x^2 - nu^2) J(ax)^2 + (x dJ(ax)/dx)^2
    nu = bessel_order_of(0.5)
    x = 1.0
    for a in [1.0, 5.0]:
        lhs, _ = quad(lambda t: t * bessel_j(nu, a * t).real ** 2, 0.0, x,
                      limit=200)
        lhs *= 2.0 * a * a
        jax_ = bessel_j(nu, a * x).real
        deriv = (nu * bessel_j(nu, a * x) - a * x * bessel_j(nu + 1.0, a * x)).real
        rhs = (a * a * x * x - nu * nu) * jax_ ** 2 + deriv ** 2
        assert abs(lhs - rhs) < 1e-6 * abs(rhs)


def test_boundary_layer_norm_scaling():
    # || x^{(1-alpha)/2} J_nu(c mu x^{(2-alpha)/2}) ||_{L2(0,1)} ~ mu^{-1/2}
    alpha = 0.5
    nu = bessel_order_of(alpha)
    c = 2.0 / (2.0 - alpha)
    mus = np.geomspace(10.0, 200.0, 9)
    norms = []
    for mu in mus:
        val, _ = quad(
            lambda x: x ** (1.0 - alpha)
            * bessel_j(nu, c * mu * x ** ((2.0 - alpha) / 2.0)).real ** 2,
            0.0, 1.0, limit=400)
        norms.append(math.sqrt(val))
    slope = np.polyfit(np.log(mus), np.log(norms), 1)[0]
    assert -0.6 < slope < -0.4
