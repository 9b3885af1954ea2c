"""Time-domain simulation of the damped degenerate model.

Space is discretized on a graded mesh x_i = (i/N)^(2/(2-alpha)) (the grading
equidistributes the endpoint oscillation scale x^((2-alpha)/2)) with the
elliptic part in conservative flux form and exact two-point transmissibility
face coefficients.  The x = 0 flux face carries the feedback; the x = 1 face
is a zero-flux (reflecting) condition.  The auxiliary relaxation modes couple to
the trace v(0) and feed the boundary flux back, all inside one monolithic
generator so the discrete energy identity

    dE/dt = -zeta * 2 sum_j w_j (xi_j^2 + eta) |phi_j|^2     (or -rho |v(0)|^2)

holds exactly.  Time stepping is trapezoidal (Crank-Nicolson) with the
factorization reused across steps; for rho = 0 the scheme conserves the
discrete energy to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .bessel import bessel_j
from .diffusive import DiffusiveGrid
from .params import ModelParams


class SimulationDiverged(RuntimeError):
    """NaN detected in the state; carries the offending step index."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite state at step {step}")


@dataclass
class SpatialGrid:
    """Graded mesh with trapezoidal cell weights and midpoint face coefficients."""

    alpha: float
    x: np.ndarray        # nodes, x[0] = 0, x[-1] = 1
    cell_w: np.ndarray   # L2 cell weights (sum to 1)
    h: np.ndarray        # face spacings x[i+1] - x[i]
    face_a: np.ndarray   # x^alpha at face midpoints

    @property
    def n_cells(self) -> int:
        return self.x.size - 1

    def l2_norm(self, v: np.ndarray) -> float:
        return math.sqrt(float(np.sum(self.cell_w * np.abs(v) ** 2)))

    def h1_alpha_norm(self, v: np.ndarray) -> float:
        dv = np.diff(v)
        grad = float(np.sum(self.face_a * np.abs(dv) ** 2 / self.h))
        return math.sqrt(self.l2_norm(v) ** 2 + grad)


def build_spatial_grid(alpha: float, n_cells: int) -> SpatialGrid:
    if n_cells < 16:
        raise ValueError(f"n_cells must be >= 16, got {n_cells}")
    i = np.arange(n_cells + 1, dtype=float)
    x = (i / n_cells) ** (2.0 / (2.0 - alpha))
    h = np.diff(x)
    cell_w = np.empty(n_cells + 1)
    cell_w[0] = 0.5 * h[0]
    cell_w[-1] = 0.5 * h[-1]
    cell_w[1:-1] = 0.5 * (h[:-1] + h[1:])
    # exact two-point transmissibility h / int x^-alpha dx: reduces to the
    # midpoint value away from 0 but keeps the flux of the x^(1-alpha)
    # endpoint layer exact, which preserves second-order convergence
    face_a = h * (1.0 - alpha) / (x[1:] ** (1.0 - alpha) - x[:-1] ** (1.0 - alpha))
    return SpatialGrid(alpha=alpha, x=x, cell_w=cell_w, h=h, face_a=face_a)


@dataclass
class SystemState:
    v: np.ndarray
    phi: np.ndarray
    t: float = 0.0

    def pack(self) -> np.ndarray:
        return np.concatenate([self.v, self.phi])


class Generator:
    """Monolithic generator on (v, phi) with its energy inner product.

    ``matrix`` is the sparse complex generator; ``weights`` the diagonal of
    the energy inner product (cell weights, then zeta * 2 * w_j).  When the
    model is direct-damping or undamped there is no phi block.
    """

    def __init__(self, params: ModelParams, grid: SpatialGrid,
                 dgrid: DiffusiveGrid | None):
        self.params = params
        self.grid = grid
        self.with_phi = params.damped and not params.direct_damping
        if self.with_phi and dgrid is None:
            raise ValueError("fractional damping needs a diffusive grid")
        self.dgrid = dgrid if self.with_phi else None
        self.nv = grid.n_cells + 1
        self.nphi = self.dgrid.n_modes if self.with_phi else 0
        self.matrix = self._assemble()
        if self.with_phi:
            self.weights = np.concatenate([
                grid.cell_w, params.zeta * 2.0 * self.dgrid.weights])
        else:
            self.weights = grid.cell_w.copy()

    @property
    def size(self) -> int:
        return self.nv + self.nphi

    def _assemble(self) -> sparse.csr_matrix:
        p = self.params
        g = self.grid
        n = self.size
        m = sparse.lil_matrix((n, n), dtype=complex)
        cond = g.face_a / g.h  # a_{i+1/2} / h_{i+1/2}
        for i in range(self.nv):
            if i < g.n_cells:      # flux through the right face of cell i
                m[i, i + 1] += -1j * cond[i] / g.cell_w[i]
                m[i, i] += 1j * cond[i] / g.cell_w[i]
            if i > 0:              # flux through the left face
                m[i, i] += 1j * cond[i - 1] / g.cell_w[i]
                m[i, i - 1] += -1j * cond[i - 1] / g.cell_w[i]
        # boundary flux at x = 0 replaces the missing left face of cell 0
        if p.damped:
            if p.direct_damping:
                m[0, 0] += -p.rho / g.cell_w[0]
            else:
                dg = self.dgrid
                for j in range(self.nphi):
                    m[0, self.nv + j] += \
                        -2.0 * p.zeta * dg.weights[j] * dg.mu[j] / g.cell_w[0]
        if self.with_phi:
            dg = self.dgrid
            rate = dg.nodes ** 2 + p.eta
            for j in range(self.nphi):
                m[self.nv + j, self.nv + j] = -rate[j]
                m[self.nv + j, 0] = dg.mu[j]
        return m.tocsr()

    def state_from(self, v: np.ndarray, phi: np.ndarray | None = None,
                   t: float = 0.0) -> SystemState:
        v = np.asarray(v, dtype=complex)
        if v.size != self.nv:
            raise ValueError(f"v has size {v.size}, grid wants {self.nv}")
        if phi is None:
            phi = np.zeros(self.nphi, dtype=complex)
        phi = np.asarray(phi, dtype=complex)
        if phi.size != self.nphi:
            raise ValueError(f"phi has size {phi.size}, wanted {self.nphi}")
        return SystemState(v=v, phi=phi, t=t)

    def unpack(self, u: np.ndarray, t: float) -> SystemState:
        return SystemState(v=u[:self.nv], phi=u[self.nv:], t=t)

    def weighted_norm(self, u: np.ndarray) -> float:
        return math.sqrt(float(np.sum(self.weights * np.abs(u) ** 2)))

    def energy(self, state: SystemState) -> float:
        return 0.5 * self.weighted_norm(state.pack()) ** 2

    def dissipation_rate(self, state: SystemState) -> float:
        p = self.params
        if not p.damped:
            return 0.0
        if p.direct_damping:
            return -p.rho * abs(state.v[0]) ** 2
        dg = self.dgrid
        # group xi with phi first: far-tail nodes have huge xi^2 but phi ~ 0,
        # and w_j * xi_j^2 alone can overflow
        scaled = np.abs(state.phi) * dg.nodes
        return -p.zeta * 2.0 * float(
            np.sum(dg.weights * scaled ** 2)
            + p.eta * np.sum(dg.weights * np.abs(state.phi) ** 2))


def assemble_generator(grid: SpatialGrid, dgrid: DiffusiveGrid | None,
                       params: ModelParams) -> Generator:
    return Generator(params, grid, dgrid)


def energy(state: SystemState, gen: Generator) -> float:
    return gen.energy(state)


def dissipation_rate(state: SystemState, gen: Generator) -> float:
    return gen.dissipation_rate(state)


class TimeStepper:
    """Trapezoidal step (I - dt/2 A) u+ = (I + dt/2 A) u, factored once."""

    def __init__(self, gen: Generator, dt: float):
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.gen = gen
        self.dt = dt
        eye = sparse.identity(gen.size, dtype=complex, format="csc")
        half = 0.5 * dt * gen.matrix
        self._lhs = splu((eye - half).tocsc())
        self._rhs = (eye + half).tocsr()

    def step(self, state: SystemState) -> SystemState:
        u = self._rhs @ state.pack()
        u = self._lhs.solve(u)
        return self.gen.unpack(u, state.t + self.dt)


def step(state: SystemState, dt: float, gen: Generator) -> SystemState:
    """Single trapezoidal step (convenience wrapper; factors each call)."""
    return TimeStepper(gen, dt).step(state)


@dataclass
class EnergyTrace:
    t: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    final_state: SystemState | None = None

    def __len__(self) -> int:
        return self.t.size


def simulate(params: ModelParams, v0, T: float, dt: float,
             grid: SpatialGrid, dgrid: DiffusiveGrid | None = None,
             stride: int = 1) -> EnergyTrace:
    """Run from (v0, phi=0) to time T recording (t, E, D) every stride steps."""
    gen = assemble_generator(grid, dgrid, params)
    if callable(v0):
        v0 = np.array([v0(x) for x in grid.x], dtype=complex)
    state = gen.state_from(v0)
    stepper = TimeStepper(gen, dt)
    n_steps = round(T / dt)
    ts = [0.0]
    es = [gen.energy(state)]
    ds = [gen.dissipation_rate(state)]
    for n in range(1, n_steps + 1):
        state = stepper.step(state)
        if n % stride == 0 or n == n_steps:
            e = gen.energy(state)
            if not math.isfinite(e):
                raise SimulationDiverged(n)
            ts.append(state.t)
            es.append(e)
            ds.append(gen.dissipation_rate(state))
    return EnergyTrace(t=np.array(ts), energy=np.array(es),
                       dissipation=np.array(ds), final_state=state)


@dataclass
class DecayFit:
    model: str
    rate: float       # log-log slope (polynomial) or d(log E)/dt (exponential)
    r_squared: float
    window: tuple
    n_points: int


def fit_decay(trace: EnergyTrace, model: str = "polynomial",
              window: tuple | None = None) -> DecayFit:
    """Least squares on (log t, log E) or (t, log E) over the window.

    Default window starts once the energy has dropped tenfold (transient
    exclusion) and runs to the end of the trace.
    """
    if model not in ("polynomial", "exponential"):
        raise ValueError(f"unknown decay model {model!r}")
    t, e = trace.t, trace.energy
    if window is None:
        below = np.nonzero(e <= 0.1 * e[0])[0]
        start = t[below[0]] if below.size else t[max(1, t.size // 2)]
        window = (start, t[-1])
    mask = (t >= window[0]) & (t <= window[1]) & (t > 0.0) & (e > 0.0)
    if mask.sum() < 10:
        raise ValueError(f"decay window {window} holds {int(mask.sum())} "
                         "samples; need at least 10")
    ydata = np.log(e[mask])
    xdata = np.log(t[mask]) if model == "polynomial" else t[mask]
    slope, intercept = np.polyfit(xdata, ydata, 1)
    resid = ydata - (slope * xdata + intercept)
    sstot = float(np.sum((ydata - ydata.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / sstot if sstot > 0 else 0.0
    return DecayFit(model=model, rate=float(slope), r_squared=r2,
                    window=window, n_points=int(mask.sum()))


def embedding_check(grid: SpatialGrid, v: np.ndarray) -> float:
    """sup |v| minus the trace constant times the weighted graph norm (<= 0)."""
    const = 1.0 / math.sqrt(1.0 - grid.alpha) + math.sqrt(2.0)
    return float(np.max(np.abs(v))) - const * grid.h1_alpha_norm(v)


# ---------------------------------------------------------------------------
# built-in initial profiles

def profile_gaussian(x):
    return math.exp(-50.0 * (x - 0.5) ** 2)


def profile_polynomial(x):
    return x * (1.0 - x)


def first_reflecting_frequency(params: ModelParams) -> float:
    """First positive zero of J_{1-nu}: frequency of the lowest nonconstant
    conservative mode (zero flux at both ends)."""
    beta = 1.0 - params.nu
    guess = (1.0 + beta / 2.0 - 0.25) * math.pi
    f = lambda r: bessel_j(beta, r).real
    return brentq(f, guess - 1.2, guess + 1.2, xtol=1e-13)


def profile_lowest_mode(params: ModelParams, grid: SpatialGrid) -> np.ndarray:
    """Lowest nonconstant undamped eigenmode sampled on the grid."""
    a = params.alpha
    r = first_reflecting_frequency(params)
    x = grid.x
    out = np.zeros(x.size, dtype=complex)
    for i, xi in enumerate(x):
        if xi == 0.0:
            # x^{(1-a)/2} J_{-nu}(c x^{(2-a)/2}) -> c^{-nu}-type constant limit
            out[i] = (0.5 * r) ** (-params.nu) / math.gamma(1.0 - params.nu)
        else:
            out[i] = xi ** ((1.0 - a) / 2.0) * bessel_j(
                -params.nu, r * xi ** ((2.0 - a) / 2.0))
    return out


def eigenmode_profile(params: ModelParams, grid: SpatialGrid,
                      gamma: complex) -> np.ndarray:
    """Damped eigenfunction c+ theta+ + c- theta- for a characteristic root."""
    from .spectrum import char_matrix

    m = char_matrix(params, gamma)
    # null vector from the better-scaled row
    if max(abs(m[0, 0]), abs(m[0, 1])) >= max(abs(m[1, 0]), abs(m[1, 1])):
        cp, cm = m[0, 1], -m[0, 0]
    else:
        cp, cm = m[1, 1], -m[1, 0]
    a = params.alpha
    nu = params.nu
    z0 = 2j * gamma / (2.0 - a)
    cplus = 1.0 / (math.gamma(1.0 + nu) * 2.0 ** nu)
    cminus = 2.0 ** nu / math.gamma(1.0 - nu)
    out = np.zeros(grid.x.size, dtype=complex)
    for i, xi in enumerate(grid.x):
        if xi == 0.0:
            out[i] = cm * cminus * z0 ** (-nu)  # theta- tends to d-; theta+ to 0
        else:
            s = xi ** ((2.0 - a) / 2.0)
            out[i] = xi ** ((1.0 - a) / 2.0) * (
                cp * bessel_j(nu, z0 * s) + cm * bessel_j(-nu, z0 * s))
    return out
