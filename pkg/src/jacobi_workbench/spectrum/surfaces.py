"""Closed radial hypersurfaces that the spectral solvers can discretize."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import GeometryJet, embedding_jet, shape_geometry
from ..sphere import ChartFrame, make_grid
from ..variation import RadialVariation
from ..willmore import willmore_normalized, willmore_shape

__all__ = ["RadialSurface", "VariedSurface", "is_zonal_function", "potential_values"]


def _rotated_samples(points: np.ndarray, angle: float, n: int) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    out = points.copy()
    out[:, 0] = c * points[:, 0] - s * points[:, 1]
    out[:, 1] = s * points[:, 0] + c * points[:, 1]
    if n > 2:
        out[:, [0, 2]] = out[:, [2, 0]]
    return out


def is_zonal_function(func, n: int, samples: int = 64, tol: float = 1e-10) -> bool:
    """True when ``func`` on S^n depends only on the last coordinate.

    Checked on fixed pseudo-random points against rotations that fix the
    last axis.
    """
    rng = np.random.default_rng(12345)
    pts = rng.standard_normal((samples, n + 1))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    ref = np.asarray(func.value(pts), float)
    scale = max(1.0, float(np.max(np.abs(ref))))
    for angle in (0.7, 2.1):
        moved = np.asarray(func.value(_rotated_samples(pts, angle, n)), float)
        if np.max(np.abs(moved - ref)) > tol * scale:
            return False
    return True


def potential_values(geom: GeometryJet, operator: str) -> np.ndarray:
    """Pointwise potential: ``-H_big^2 / n`` for ``"mean"``, ``-|II|^2`` for ``"jacobi"``."""
    if operator == "mean":
        return -(geom.H_big.v**2) / geom.n
    if operator == "jacobi":
        return -geom.II2.v
    raise ValueError(f"unknown operator {operator!r}; use 'mean' or 'jacobi'")


@dataclass(frozen=True)
class RadialSurface:
    """The radial graph ``scale * radius_func(y) * y`` over S^n."""

    radius_func: object
    n: int = 2
    scale: float = 1.0
    label: str = "radial"

    def radius(self, directions) -> np.ndarray:
        return self.scale * np.asarray(self.radius_func.value(directions), float)

    def geometry(self, frame: ChartFrame) -> GeometryJet:
        return shape_geometry(self.radius_func, frame, self.scale)

    @property
    def zonal(self) -> bool:
        return is_zonal_function(self.radius_func, self.n)

    def willmore(self, resolution: int = 64) -> tuple[float, float]:
        """Normalized Willmore value with the change under doubled resolution."""
        zonal = self.zonal
        coarse = willmore_shape(self.radius_func, make_grid(self.n, resolution, zonal=zonal), self.scale)
        fine = willmore_shape(self.radius_func, make_grid(self.n, 2 * resolution, zonal=zonal), self.scale)
        return fine, abs(fine - coarse)

    def describe(self) -> dict:
        return {"kind": "radial", "label": self.label, "n": self.n, "scale": self.scale}


@dataclass(frozen=True)
class VariedSurface:
    """Member ``X_t`` of a volume-preserving variation of the unit sphere."""

    variation: RadialVariation
    t: float
    label: str = "variation"

    @property
    def n(self) -> int:
        return self.variation.n

    def radius(self, directions) -> np.ndarray:
        f = np.asarray(self.variation.func.value(directions), float)
        return 1.0 + self.t * f + self.variation.solve(self.t)

    def geometry(self, frame: ChartFrame) -> GeometryJet:
        return embedding_jet(self.variation, frame, self.t)

    @property
    def zonal(self) -> bool:
        return is_zonal_function(self.variation.func, self.n)

    def willmore(self, resolution: int | None = None) -> tuple[float, float]:
        var = self.variation
        base = willmore_normalized(var, self.t)
        res = 2 * var.grid.resolution if resolution is None else resolution
        fine_var = RadialVariation(var.func, make_grid(var.n, res, zonal=var.grid.zonal), var.t_max)
        fine = willmore_normalized(fine_var, self.t)
        return fine, abs(fine - base)

    def describe(self) -> dict:
        return {"kind": "variation", "label": self.label, "n": self.n, "t": self.t}
