"""Numerical laboratory for a boundary-damped degenerate Schrodinger equation.

The model is v_t + i (x^alpha v_x)_x = 0 on (0, 1) with a fractional-order
feedback acting through the flux at the degenerate endpoint x = 0.  The
package computes its spectrum from the Bessel characteristic equation,
simulates the coupled time-domain system with its diffusive realization of
the fractional memory, and measures resolvent growth along the imaginary
axis -- the three views the stability theory ties together.
"""

__version__ = "0.1.0"

from .params import ModelParams, bessel_order_of, damping_threshold

__all__ = ["ModelParams", "bessel_order_of", "damping_threshold", "__version__"]
