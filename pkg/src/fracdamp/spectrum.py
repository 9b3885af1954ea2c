"""Eigenvalues of the damped generator from the Bessel characteristic equation.

A nontrivial mode exists exactly when the 2x2 boundary-condition matrix

    M(g) = [ (1-a) d+            -i rho (lam+eta)^(at-1) d-   ]
           [ theta+'(1)          theta-'(1)                   ]

is singular, where lam = -i g^2, z = 2 i g / (2 - alpha) and

    d+  = c+ z^nu,   d- = c- z^(-nu),
    theta+'(1) = (1-alpha) J_nu(z) - i g J_{nu+1}(z),
    theta-'(1) = -i g J_{1-nu}(z).

Roots g_k sit near the explicit anchor points

    g_k^0 = -(2-alpha)/2 * i * (k - nu/2 + 5/4) * pi,

and Newton refinement from those anchors converges inside balls of radius
k^-nu.  The closed-form large-k eigenvalue laws (four regimes in the
feedback order) are evaluated alongside for comparison.  At alpha_tilde = 1
the feedback is rho*v(0) and the power factor is absent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import BesselOrder, bessel_j
from .params import ModelParams

CASE_TAGS = ("alpha_tilde_one", "above_threshold", "middle_band", "below_nu")

# boundary detection between asymptotic-law regimes
_BOUNDARY_EPS = 1e-12


class RootLostError(RuntimeError):
    """Newton left its basin or failed to converge; carries the iterate trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class DegenerateRowError(RuntimeError):
    """Both entries of a characteristic-matrix row are numerically zero."""


def leading_coeffs(nu: float) -> tuple:
    """(c+, c-): leading series coefficients at orders +nu and -nu."""
    cplus = 1.0 / (math.gamma(1.0 + nu) * 2.0 ** nu)
    cminus = 2.0 ** nu / math.gamma(1.0 - nu)
    return cplus, cminus


def char_matrix(params: ModelParams, gamma: complex) -> np.ndarray:
    """Boundary-condition matrix M(gamma); singular exactly at eigenvalues."""
    gamma = complex(gamma)
    if gamma == 0.0:
        raise ValueError("characteristic matrix undefined at gamma = 0")
    a = params.alpha
    nu = params.nu
    order = BesselOrder.from_alpha(a)
    z = 2.0j * gamma / (2.0 - a)
    lam = -1.0j * gamma * gamma
    cplus, cminus = leading_coeffs(nu)
    dplus = cplus * z ** nu
    dminus = cminus * z ** (-nu)
    if params.direct_damping:
        power = 1.0 + 0.0j
    else:
        power = (lam + params.eta) ** (params.alpha_tilde - 1.0)
    tp = (1.0 - a) * bessel_j(order, z) - 1.0j * gamma * bessel_j(order.shifted(1), z)
    tm = -1.0j * gamma * bessel_j(order.negated().shifted(1), z)
    return np.array([
        [(1.0 - a) * dplus, -1.0j * params.rho * power * dminus],
        [tp, tm],
    ], dtype=complex)


def _row_scales(m: np.ndarray) -> tuple:
    s1 = max(abs(m[0, 0]), abs(m[0, 1]))
    s2 = max(abs(m[1, 0]), abs(m[1, 1]))
    if s1 < 1e-300 or s2 < 1e-300:
        raise DegenerateRowError("degenerate row in characteristic matrix")
    return s1, s2


def _det(m: np.ndarray) -> complex:
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def char_fn(params: ModelParams, gamma: complex) -> complex:
    """Row-rescaled determinant: det after dividing each row by its largest
    entry.  Same roots as the raw determinant, conditioning bounded."""
    m = char_matrix(params, gamma)
    s1, s2 = _row_scales(m)
    return _det(m) / (s1 * s2)


def raw_char_det(params: ModelParams, gamma: complex) -> complex:
    """Unscaled determinant (its lower envelope growth is itself a check)."""
    return _det(char_matrix(params, gamma))


def seed_root(params: ModelParams, k: int) -> complex:
    """Anchor root g_k^0 = -(2-alpha)/2 i (k - nu/2 + 5/4) pi."""
    if k < 1:
        raise ValueError(f"seed index must be >= 1, got {k}")
    return -0.5 * (2.0 - params.alpha) * 1j * (k - params.nu / 2.0 + 1.25) * math.pi


def _infer_k(params: ModelParams, seed: complex) -> int:
    return round(-seed.imag * 2.0 / ((2.0 - params.alpha) * math.pi)
                 + params.nu / 2.0 - 1.25)


def refine_root(params: ModelParams, seed: complex, k: int | None = None,
                max_iter: int = 50) -> "EigenRecord":
    """Newton iteration on the rescaled determinant from the given seed.

    The derivative is a complex central difference at relative step 1e-6;
    the row scales are frozen at the current iterate so the differenced
    function is holomorphic.  The refined root must stay within twice the
    anchor-ball radius k^-nu or RootLostError is raised with the trace.
    """
    if k is None:
        k = _infer_k(params, seed)
    radius = float(k) ** (-params.nu) if k >= 1 else 1.0
    gamma = complex(seed)
    trace = [gamma]
    converged = False
    for _ in range(max_iter):
        m = char_matrix(params, gamma)
        s1, s2 = _row_scales(m)
        scale = s1 * s2
        f0 = _det(m) / scale
        h = 1e-6 * max(1.0, abs(gamma))
        fp = _det(char_matrix(params, gamma + h)) / scale
        fm = _det(char_matrix(params, gamma - h)) / scale
        deriv = (fp - fm) / (2.0 * h)
        if deriv == 0.0:
            raise RootLostError("root lost: vanishing derivative", trace)
        step = -f0 / deriv
        gamma += step
        trace.append(gamma)
        if abs(gamma - seed) > 2.0 * radius:
            raise RootLostError(
                f"root lost: left the basin around k={k}", trace)
        if abs(step) < 1e-12 * max(1.0, abs(gamma)):
            converged = True
            break
    residual = abs(char_fn(params, gamma))
    if not converged and residual > 1e-10:
        raise RootLostError(
            f"root lost: no convergence in {max_iter} iterations (residual "
            f"{residual:.2e})", trace)
    if residual > 1e-8:
        raise RootLostError(
            f"root lost: residual {residual:.2e} above 1e-8 at k={k}", trace)
    lam = -1.0j * gamma * gamma
    if lam.real > 1e-10:
        raise RootLostError(
            f"root lost: positive real part {lam.real:.2e} at k={k}", trace)
    lam_asym, tag, boundary = asymptotic_lambda(params, k) if k >= 1 \
        else (complex(math.nan, math.nan), case_tag_of(params), False)
    return EigenRecord(k=k, gamma=gamma, lam=lam, residual=residual,
                       lam_asym=lam_asym, case_tag=tag, boundary=boundary)


def case_tag_of(params: ModelParams) -> str:
    """Which large-k eigenvalue law applies for these parameters."""
    if params.direct_damping:
        return "alpha_tilde_one"
    at, nu, thr = params.alpha_tilde, params.nu, params.threshold
    if at >= thr - _BOUNDARY_EPS:
        return "above_threshold"
    if at >= nu - _BOUNDARY_EPS:
        return "middle_band"
    return "below_nu"


@dataclass(frozen=True)
class CaseConstants:
    """Constants entering the closed-form eigenvalue law of one regime."""

    case_tag: str
    C0: float
    C1: float
    C2: float
    C3: float = 0.0
    C4: float = 0.0

    def __post_init__(self):
        assert self.C0 < 0.0 and self.C1 < 0.0


def case_constants(params: ModelParams) -> CaseConstants:
    a, at, nu, rho = params.alpha, params.alpha_tilde, params.nu, params.rho
    tag = case_tag_of(params)
    cplus, cminus = leading_coeffs(nu)
    ratio = cminus / cplus
    c0 = -(2.0 - a) / 2.0
    c1 = c0 * (-nu / 2.0 + 1.25)
    gain = rho * (2.0 - a) / (2.0 * (1.0 - a)) * ratio
    if tag == "alpha_tilde_one":
        return CaseConstants(tag, c0, c1, C2=gain)
    scaled_gain = gain * (2.0 / (2.0 - a)) ** (2.0 - 2.0 * at)
    curv = (2.0 - a) / 4.0 * (0.5 - nu) * (1.5 - nu)
    if tag == "above_threshold":
        return CaseConstants(tag, c0, c1, C2=scaled_gain, C3=curv)
    if tag == "middle_band":
        return CaseConstants(tag, c0, c1, C2=scaled_gain, C3=curv)
    # below_nu: the curvature constant moves to C2, the 1/k drift to C3
    m = -(0.5 - nu) * (1.5 - nu) / 2.0
    c3 = -(2.0 - a) / 2.0 * m * (-nu / 2.0 + 1.25)
    return CaseConstants(tag, c0, c1, C2=curv, C3=c3, C4=scaled_gain)


def asymptotic_lambda(params: ModelParams, k: int, n_min: int = 5):
    """Closed-form large-k eigenvalue with its regime tag.

    Returns (lambda, case_tag, boundary_flag); boundary_flag marks
    parameters sitting exactly on a regime boundary, where the adjacent
    open-side law is used.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    cc = case_constants(params)
    nu, at = params.nu, params.alpha_tilde
    kpi = k * math.pi
    pi2 = math.pi * math.pi
    boundary = (not params.direct_damping) and (
        abs(at - params.threshold) <= _BOUNDARY_EPS
        or abs(at - nu) <= _BOUNDARY_EPS)
    sin_nu = math.sin(nu * math.pi)
    if cc.case_tag == "alpha_tilde_one":
        lam = 1j * (cc.C0 ** 2 * kpi ** 2 + 2.0 * cc.C0 * cc.C1 * k * pi2) \
            + 2.0 * cc.C0 * cc.C2 * sin_nu * kpi ** (1.0 - 2.0 * nu)
        return lam, cc.case_tag, False
    phase = cmath.exp(-1.5j * at * math.pi)  # principal (-i)^(3 alpha_tilde)
    damp = -2.0j * cc.C0 * (cc.C4 if cc.case_tag == "below_nu" else cc.C2) \
        * phase * sin_nu * kpi ** (-(2.0 * nu - 2.0 * at + 1.0))
    if cc.case_tag == "above_threshold":
        lam = 1j * (cc.C0 ** 2 * kpi ** 2 + 2.0 * cc.C0 * cc.C1 * k * pi2) + damp
    elif cc.case_tag == "middle_band":
        lam = 1j * (cc.C0 ** 2 * kpi ** 2 + cc.C1 ** 2 * pi2
                    + 2.0 * cc.C0 * cc.C1 * k * pi2 + 2.0 * cc.C0 * cc.C3) + damp
    else:  # below_nu
        lam = 1j * (cc.C0 ** 2 * kpi ** 2 + cc.C1 ** 2 * pi2
                    + 2.0 * cc.C0 * cc.C1 * k * pi2 + 2.0 * cc.C0 * cc.C2
                    + 2.0 * cc.C0 * cc.C3 / k + 2.0 * cc.C0 * cc.C1 / k) + damp
    return lam, cc.case_tag, boundary


def probe_lambda0(params: ModelParams, k: int,
                  source: str = "refined") -> complex:
    """Purely imaginary probe points on the eigenvalue branch.

    At these frequencies the resolvent norm grows at least like
    k^(2 nu - 2 at + 1).  Defined for the two polynomial regimes.

    source="refined" places the probe at i Im(lambda_k) of the Newton root,
    which tracks the branch to working precision.  source="asymptotic" uses
    the printed closed-form fine structure instead; its 1/k coefficient does
    not match the true roots (measured +0.49/k against +1.10/k printed for
    alpha=0.5, at=0.25), so it drifts off the branch faster than the real
    parts decay and cannot exhibit the growth law at reachable k.
    """
    cc = case_constants(params)
    if cc.case_tag not in ("middle_band", "below_nu"):
        raise ValueError("probe points exist only in the polynomial regimes")
    if source == "refined":
        rec = refine_root(params, seed_root(params, k), k=k)
        return 1j * rec.lam.imag
    if source != "asymptotic":
        raise ValueError(f"unknown probe source {source!r}")
    kpi = k * math.pi
    pi2 = math.pi * math.pi
    if cc.case_tag == "middle_band":
        val = cc.C0 ** 2 * kpi ** 2 + cc.C1 ** 2 * pi2 \
            + 2.0 * cc.C0 * cc.C1 * k * pi2 + 2.0 * cc.C0 * cc.C3
    else:
        val = cc.C0 ** 2 * kpi ** 2 + cc.C1 ** 2 * pi2 \
            + 2.0 * cc.C0 * cc.C1 * k * pi2 + 2.0 * cc.C0 * cc.C2 \
            + 2.0 * cc.C0 * cc.C3 / k + 2.0 * cc.C0 * cc.C1 / k
    return 1j * val


@dataclass
class EigenRecord:
    """One refined eigenvalue with its closed-form prediction."""

    k: int
    gamma: complex
    lam: complex
    residual: float
    lam_asym: complex
    case_tag: str
    boundary: bool = False

    @property
    def rel_gap(self) -> float:
        return abs(self.lam - self.lam_asym) / abs(self.lam)

    def mirrored(self) -> "EigenRecord":
        """The negative-index partner, defined by conjugation of the pair."""
        return EigenRecord(k=-self.k, gamma=1j * self.gamma.conjugate(),
                           lam=self.lam.conjugate(), residual=self.residual,
                           lam_asym=self.lam_asym.conjugate(),
                           case_tag=self.case_tag, boundary=self.boundary)


@dataclass
class SpectrumRun:
    """Batch result: refined records, failures, and collision flags."""

    records: list = field(default_factory=list)
    lost: list = field(default_factory=list)        # (k, message)
    collisions: list = field(default_factory=list)  # (k, k') too-close pairs


def compute_spectrum(params: ModelParams, k_min: int, k_max: int) -> SpectrumRun:
    """Seed -> refine -> attach prediction for every k in [k_min, k_max]."""
    if not 1 <= k_min <= k_max <= 500:
        raise ValueError(f"need 1 <= k_min <= k_max <= 500, got {k_min}..{k_max}")
    run = SpectrumRun()
    for k in range(k_min, k_max + 1):
        try:
            run.records.append(refine_root(params, seed_root(params, k), k=k))
        except (RootLostError, DegenerateRowError) as exc:
            run.lost.append((k, str(exc)))
    for rec, nxt in zip(run.records, run.records[1:]):
        min_sep = 0.5 * max(rec.k, 1) ** (-params.nu)
        if abs(rec.gamma - nxt.gamma) <= min_sep:
            run.collisions.append((rec.k, nxt.k))
    return run


def det_lower_envelope(params: ModelParams, t_min: float = 10.0,
                       t_max: float = 300.0):
    """Lower envelope of |det M(-i t)| along the imaginary axis.

    The dominant determinant term carries J_{1-nu}(z), z = 2 t / (2-alpha);
    at each of its zeros the determinant drops to the subdominant feedback
    term, whose magnitude is the envelope.  The dips are narrow (depth over
    width scales like a power of t), so each one is located with a bounded
    scalar minimization of |det|^2 inside a bracket around the predicted
    zero rather than by sampling.

    Returns (t_centers, envelope, slope) with slope the log-log fit.
    """
    from scipy.optimize import minimize_scalar

    a = params.alpha
    nu = params.nu
    scale = 2.0 / (2.0 - a)
    z_lo, z_hi = scale * t_min, scale * t_max
    # predicted zeros of J_{1-nu}: z ~ (m + 1/4 - nu/2) pi
    off = 0.25 - nu / 2.0
    m_lo = math.ceil((z_lo + 0.45) / math.pi - off)
    m_hi = math.floor((z_hi - 0.45) / math.pi - off)
    centers = []
    env = []
    for m in range(m_lo, m_hi + 1):
        z_m = (m + off) * math.pi
        fun = lambda t: abs(raw_char_det(params, -1j * t)) ** 2
        res = minimize_scalar(fun, bounds=((z_m - 0.45) / scale,
                                           (z_m + 0.45) / scale),
                              method="bounded",
                              options={"xatol": 1e-12, "maxiter": 200})
        centers.append(res.x)
        env.append(math.sqrt(res.fun))
    centers = np.asarray(centers)
    env = np.asarray(env)
    slope = float(np.polyfit(np.log(centers), np.log(env), 1)[0])
    return centers, env, slope
