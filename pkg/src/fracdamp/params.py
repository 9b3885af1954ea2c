"""Physical parameters of the boundary-damped degenerate model.

The model is controlled by four numbers: the degeneracy exponent ``alpha``
of the elliptic coefficient x^alpha, the order ``alpha_tilde`` of the
fractional feedback at x = 0, the kernel shift ``eta``, and the feedback
gain ``rho``.  Everything else used downstream (the endpoint Bessel order,
the diffusive gain ``zeta``, the stability threshold) is derived here once
so all modules agree on the arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def bessel_order_of(alpha: float) -> float:
    """Endpoint Bessel order nu = (1 - alpha) / (2 - alpha), in (0, 1/2)."""
    return (1.0 - alpha) / (2.0 - alpha)


def damping_threshold(alpha: float) -> float:
    """Feedback order separating bounded-resolvent from polynomial growth.

    Equals (4 - 3*alpha) / (2*(2 - alpha)), which is nu_alpha + 1/2.
    """
    return (4.0 - 3.0 * alpha) / (2.0 * (2.0 - alpha))


@dataclass(frozen=True)
class ModelParams:
    """The quadruple (alpha, alpha_tilde, eta, rho) plus derived constants.

    ``rho == 0`` is allowed and means the undamped (conservative) model.
    ``alpha_tilde == 1`` selects the direct-damping mode in which the
    feedback is rho*v(0) and no auxiliary diffusive variable exists.
    """

    alpha: float
    alpha_tilde: float = 1.0
    eta: float = 0.0
    rho: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.alpha_tilde <= 1.0:
            raise ValueError(
                f"alpha_tilde must lie in (0, 1], got {self.alpha_tilde}")
        if self.eta < 0.0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.rho < 0.0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        # threshold(alpha) == nu + 1/2, so the two regime tests must agree
        gap = self.nu - self.alpha_tilde + 0.5
        above = self.alpha_tilde >= damping_threshold(self.alpha)
        assert (gap <= 1e-12) == above or abs(gap) <= 1e-12

    @property
    def nu(self) -> float:
        return bessel_order_of(self.alpha)

    @property
    def zeta(self) -> float:
        """Diffusive gain rho * sin(pi*alpha_tilde) / pi (zero at alpha_tilde=1)."""
        return self.rho * math.sin(math.pi * self.alpha_tilde) / math.pi

    @property
    def threshold(self) -> float:
        return damping_threshold(self.alpha)

    @property
    def direct_damping(self) -> bool:
        """True when the feedback acts as rho*v(0) with no diffusive variable."""
        return self.alpha_tilde == 1.0

    @property
    def damped(self) -> bool:
        return self.rho > 0.0

    def describe(self) -> str:
        return (f"alpha={self.alpha:g} alpha_tilde={self.alpha_tilde:g} "
                f"eta={self.eta:g} rho={self.rho:g}")
