"""Rotationally symmetric hypersurfaces: reduction of the Schrödinger operator to one dimension.

For a radial graph whose radius depends only on the polar angle ``theta``,
a zonal function ``u(theta)`` satisfies

    -Delta u + V u = -(1/J) (J a u')' + V u,

where ``J(theta)`` is the volume density along the meridian (``sqrt g`` in the
hyperspherical chart with all other angles at their equatorial values),
``a = g^{theta theta}`` and ``V`` is the potential.  The ground state of a
Schrödinger operator is simple and positive, so it shares the surface's
rotational symmetry and the lowest zonal eigenvalue is the global one.

The interval is split into ``resolution`` equal cells.  Unknowns sit at cell
centres, fluxes ``J a u'`` at faces, and the two pole faces carry zero flux.
This gives a symmetric tridiagonal stiffness and a diagonal mass
``J(theta_c) dtheta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..geometry import DegenerateGeometryError
from ..sphere import chart_frame
from .eigen import SpectrumResult, lowest_eigenpairs
from .surfaces import VariedSurface, potential_values

__all__ = ["ZonalProblem", "zonal_operator", "zonal_spectrum", "zonal_sturm_liouville"]


def _meridian_frame(n: int, theta: np.ndarray):
    angles = np.full((len(theta), n), np.pi / 2)
    angles[:, 0] = theta
    angles[:, -1] = 0.0
    return chart_frame(angles)


@dataclass
class ZonalProblem:
    theta: np.ndarray  # cell centres
    faces: np.ndarray
    J_faces: np.ndarray
    a_faces: np.ndarray
    stiffness: sp.csr_matrix
    mass: np.ndarray
    potential: np.ndarray
    n: int
    operator: str

    @property
    def discretization(self) -> dict:
        return {"kind": "zonal", "resolution": len(self.theta), "n": self.n, "operator": self.operator}


def zonal_operator(surface, resolution: int, operator: str = "mean", check: bool = True) -> ZonalProblem:
    """Assemble the finite-volume meridian problem for a zonal surface."""
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    n = surface.n
    if check and not surface.zonal:
        raise ValueError("the zonal reduction needs a rotationally symmetric surface")
    h = np.pi / resolution
    centres = (np.arange(resolution) + 0.5) * h
    faces = np.arange(1, resolution) * h
    gc = surface.geometry(_meridian_frame(n, centres))
    gf = surface.geometry(_meridian_frame(n, faces))
    J_c = gc.sqrt_g.v
    J_f = gf.sqrt_g.v
    a_f = gf.g_inv.v[:, 0, 0]
    if np.any(J_c <= 0) or np.any(a_f <= 0):
        idx = int(np.argmin(np.minimum(J_c[:-1], a_f)))
        raise DegenerateGeometryError(gf.frame.Phi[idx], getattr(surface, "t", None), "degenerate meridian")
    w = J_f * a_f / h
    main = np.zeros(resolution)
    main[:-1] += w
    main[1:] += w
    K = sp.diags([main, -w, -w], [0, 1, -1], format="csr")
    return ZonalProblem(centres, faces, J_f, a_f, K, J_c * h, potential_values(gc, operator), n, operator)


def zonal_spectrum(surface, resolution: int = 512, k: int = 1, operator: str = "mean", **solver) -> SpectrumResult:
    """Lowest ``k`` zonal eigenpairs of a rotationally symmetric surface."""
    problem = zonal_operator(surface, resolution, operator)
    return lowest_eigenpairs(problem, k, **solver)


def zonal_sturm_liouville(
    n: int, variation, t: float, resolution: int = 512, k: int = 1, operator: str = "mean", **solver
) -> SpectrumResult:
    """Zonal spectrum of the member ``X_t`` of a variation with a zonal direction."""
    if variation.n != n:
        raise ValueError(f"variation lives on S^{variation.n}, not S^{n}")
    return zonal_spectrum(VariedSurface(variation, t), resolution, k, operator, **solver)
