"""Central differences with one Richardson step."""

from __future__ import annotations

import numpy as np


def central_diff(fn, t0: float, h: float, order: int):
    """Five-point central difference of ``fn`` at ``t0`` (order 1 or 2)."""
    f = {k: np.asarray(fn(t0 + k * h), float) for k in (-2, -1, 1, 2)}
    if order == 1:
        return (-f[2] + 8.0 * f[1] - 8.0 * f[-1] + f[-2]) / (12.0 * h)
    if order == 2:
        f0 = np.asarray(fn(t0), float)
        return (-f[2] + 16.0 * f[1] - 30.0 * f0 + 16.0 * f[-1] - f[-2]) / (12.0 * h * h)
    raise ValueError("order must be 1 or 2")


def richardson(fn, t0: float, h: float, order: int, with_error: bool = False):
    """Richardson-extrapolated five-point derivative over steps ``h`` and ``h/2``.

    The five-point stencils are fourth order, so the combination is
    ``(16 D(h/2) - D(h)) / 15``.  With ``with_error`` the magnitude of the
    correction is returned as a crude error estimate.
    """
    coarse = central_diff(fn, t0, h, order)
    fine = central_diff(fn, t0, h / 2.0, order)
    value = (16.0 * fine - coarse) / 15.0
    if with_error:
        return value, np.abs(value - fine)
    return value
