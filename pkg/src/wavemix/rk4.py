"""Classical fixed-step fourth-order Runge-Kutta."""

import numpy as np


def rk4_step(f, y, h):
    """Advance ``y' = f(y)`` by one step of size ``h``."""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def linear_step_matrix(m, h):
    """One RK4 step of ``y' = m y`` as a matrix acting on ``y``.

    Because the right-hand side is linear, applying :func:`rk4_step` to the
    identity produces the exact stage-combined update
    ``I + hm + (hm)^2/2 + (hm)^3/6 + (hm)^4/24``.
    """
    m = np.asarray(m)
    eye = np.eye(m.shape[0], dtype=np.result_type(m, complex))
    return rk4_step(lambda y: m @ y, eye, h)
