"""The unit sphere S^n: charts, quadrature, harmonics and projection.

Hyperspherical chart
--------------------
Angles ``(theta_0, ..., theta_{n-1})`` with ``theta_0 .. theta_{n-2}`` polar in
``[0, pi]`` and ``theta_{n-1}`` the azimuth.  The point is

    y_n     = cos theta_0
    y_k     = sin theta_0 ... sin theta_{n-k-1} cos theta_{n-k}      (2 <= k < n)
    y_1     = sin theta_0 ... sin theta_{n-2} sin theta_{n-1}
    y_0     = sin theta_0 ... sin theta_{n-2} cos theta_{n-1}

so for n = 2 it is the usual ``(sin t cos p, sin t sin p, cos t)``.  The polar
angle ``theta_0`` is measured from the last coordinate axis; zonal functions
depend on it alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import roots_jacobi

from .fields import sphere_volume, zonal_normalization

__all__ = [
    "ChartFrame",
    "QuadratureGrid",
    "ScalarField",
    "UnsupportedBasisError",
    "chart_frame",
    "frames_at_points",
    "integrate",
    "laplacian_eigenvalue",
    "make_grid",
    "project_onto_harmonics",
    "spherical_harmonic",
    "sphere_volume",
    "zonal_harmonic",
]


class UnsupportedBasisError(ValueError):
    """Raised when no harmonic basis is available for a field."""


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

_SIN, _COS = 0, 1


def _component_factors(n: int) -> list[list[tuple[int, int]]]:
    comps: list[list[tuple[int, int]]] = [None] * (n + 1)  # type: ignore[list-item]
    sines = [(i, _SIN) for i in range(n - 1)]
    comps[0] = sines + [(n - 1, _COS)]
    comps[1] = sines + [(n - 1, _SIN)]
    for k in range(2, n + 1):
        comps[k] = [(i, _SIN) for i in range(n - k)] + [(n - k, _COS)]
    return comps


def _factor(trig, kind: int, order: int) -> np.ndarray:
    s, c = trig
    if kind == _SIN:
        return (s, c, -s)[order]
    return (c, -s, -c)[order]


@dataclass(frozen=True)
class ChartFrame:
    """Chart point data: ``Phi``, ``dPhi[i] = dPhi/dx_i``, ``ddPhi[i, j]``.

    Shapes ``(P, n+1)``, ``(P, n, n+1)`` and ``(P, n, n, n+1)``.
    """

    Phi: np.ndarray
    dPhi: np.ndarray
    ddPhi: np.ndarray

    @property
    def n(self) -> int:
        return self.dPhi.shape[1]

    def __len__(self) -> int:
        return self.Phi.shape[0]

    @cached_property
    def metric(self) -> np.ndarray:
        """Round metric ``<dPhi_i, dPhi_j>``."""
        return np.einsum("pia,pja->pij", self.dPhi, self.dPhi)

    @cached_property
    def sqrt_det(self) -> np.ndarray:
        return np.sqrt(np.linalg.det(self.metric))

    def rotated(self, rotation: np.ndarray) -> "ChartFrame":
        """Frame of the chart ``R o Phi`` (rotation per point or shared)."""
        r = np.asarray(rotation, float)
        if r.ndim == 2:
            return ChartFrame(self.Phi @ r.T, self.dPhi @ r.T, self.ddPhi @ r.T)
        return ChartFrame(
            np.einsum("pab,pb->pa", r, self.Phi),
            np.einsum("pab,pib->pia", r, self.dPhi),
            np.einsum("pab,pijb->pija", r, self.ddPhi),
        )

    def subset(self, idx) -> "ChartFrame":
        return ChartFrame(self.Phi[idx], self.dPhi[idx], self.ddPhi[idx])


def chart_frame(angles) -> ChartFrame:
    """Evaluate the hyperspherical chart and its first two derivatives."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    p, n = angles.shape
    trig = (np.sin(angles), np.cos(angles))
    comps = _component_factors(n)
    Phi = np.empty((p, n + 1))
    dPhi = np.zeros((p, n, n + 1))
    ddPhi = np.zeros((p, n, n, n + 1))
    for k, factors in enumerate(comps):
        vals = {a: _factor((trig[0][:, a], trig[1][:, a]), kind, 0) for a, kind in factors}
        Phi[:, k] = np.prod([vals[a] for a in vals], axis=0)
        for a, kind_a in factors:
            rest = [vals[b] for b in vals if b != a]
            base = np.prod(rest, axis=0) if rest else 1.0
            ta = (trig[0][:, a], trig[1][:, a])
            dPhi[:, a, k] = _factor(ta, kind_a, 1) * base
            ddPhi[:, a, a, k] = _factor(ta, kind_a, 2) * base
            for b, kind_b in factors:
                if b == a:
                    continue
                rest2 = [vals[c] for c in vals if c not in (a, b)]
                base2 = np.prod(rest2, axis=0) if rest2 else 1.0
                tb = (trig[0][:, b], trig[1][:, b])
                ddPhi[:, a, b, k] = _factor(ta, kind_a, 1) * _factor(tb, kind_b, 1) * base2
    return ChartFrame(Phi, dPhi, ddPhi)


def reference_angles(n: int) -> np.ndarray:
    """Chart point mapped to ``e_0`` with every sine equal to one."""
    a = np.full(n, math.pi / 2)
    a[-1] = 0.0
    return a


def householder_to(points) -> np.ndarray:
    """Orthogonal matrices ``R`` (one per point) with ``R e_0 = p``."""
    pts = np.atleast_2d(np.asarray(points, float))
    d = pts.shape[1]
    e0 = np.zeros(d)
    e0[0] = 1.0
    v = e0 - pts
    nv = np.einsum("pa,pa->p", v, v)
    out = np.broadcast_to(np.eye(d), (len(pts), d, d)).copy()
    ok = nv > 1e-24
    out[ok] -= 2.0 * v[ok, :, None] * v[ok, None, :] / nv[ok, None, None]
    return out


def frames_at_points(points) -> ChartFrame:
    """Regular chart frames at arbitrary unit points (rotated reference chart)."""
    pts = np.atleast_2d(np.asarray(points, float))
    n = pts.shape[1] - 1
    ref = chart_frame(reference_angles(n)[None, :])
    rot = householder_to(pts)
    ref = ChartFrame(
        np.repeat(ref.Phi, len(pts), axis=0),
        np.repeat(ref.dPhi, len(pts), axis=0),
        np.repeat(ref.ddPhi, len(pts), axis=0),
    )
    return ref.rotated(rot)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor-product quadrature on S^n.

    ``zonal`` grids keep only the polar nodes on one meridian; their weights
    already contain the volume of the orthogonal S^{n-1} factor, so they
    integrate zonal functions exactly as the full grid would.
    """

    dim: int
    resolution: int
    nodes: np.ndarray
    unit_points: np.ndarray
    weights: np.ndarray
    zonal: bool = False

    def __len__(self) -> int:
        return len(self.weights)

    @cached_property
    def frame(self) -> ChartFrame:
        return chart_frame(self.nodes)

    @property
    def polar(self) -> np.ndarray:
        return self.nodes[:, 0]

    @property
    def volume(self) -> float:
        return math.fsum(self.weights)

    def integrate(self, values) -> float:
        values = np.asarray(values, float)
        if values.shape != self.weights.shape:
            raise ValueError(f"expected {self.weights.shape} node values, got {values.shape}")
        return math.fsum(values * self.weights)

    def to_dict(self, values=None) -> dict:
        return {
            "dim": self.dim,
            "resolution": self.resolution,
            "zonal": self.zonal,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "values": None if values is None else np.asarray(values, float).tolist(),
        }


def _polar_rule(resolution: int, exponent: int):
    """Nodes/weights for int_0^pi F(theta) sin^exponent(theta) dtheta."""
    a = (exponent - 1) / 2.0
    x, w = roots_jacobi(resolution, a, a)
    order = np.argsort(-x)  # ascending theta
    return np.arccos(x[order]), w[order]


def make_grid(n: int, resolution: int, zonal: bool = False) -> QuadratureGrid:
    """Tensor-product grid on S^n.

    Each polar angle with Jacobian ``sin^m`` uses the Gauss-Jacobi rule with
    weight ``(1 - x^2)^((m-1)/2)`` in ``x = cos theta`` (Gauss-Legendre when
    ``m = 1``); the azimuth uses ``2 * resolution`` trapezoid nodes.
    """
    if n < 2:
        raise ValueError(f"sphere dimension must be >= 2, got {n}")
    if resolution < 4:
        raise ValueError(f"resolution must be >= 4, got {resolution}")
    rules = [_polar_rule(resolution, n - 1 - i) for i in range(n - 1)]
    if zonal:
        theta, w = rules[0]
        nodes = np.tile(reference_angles(n), (resolution, 1))
        nodes[:, 0] = theta
        weights = w * sphere_volume(n - 1)
    else:
        n_az = 2 * resolution
        az = 2.0 * math.pi * np.arange(n_az) / n_az
        axes = [r[0] for r in rules] + [az]
        waxes = [r[1] for r in rules] + [np.full(n_az, 2.0 * math.pi / n_az)]
        mesh = np.meshgrid(*axes, indexing="ij")
        wmesh = np.meshgrid(*waxes, indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        weights = np.prod([m.ravel() for m in wmesh], axis=0)
    pts = chart_frame(nodes).Phi
    return QuadratureGrid(n, resolution, nodes, pts, weights, zonal)


def grid_from_dict(data: dict) -> QuadratureGrid:
    nodes = np.asarray(data["nodes"], float)
    return QuadratureGrid(
        int(data["dim"]),
        int(data["resolution"]),
        nodes,
        chart_frame(nodes).Phi,
        np.asarray(data["weights"], float),
        bool(data.get("zonal", False)),
    )


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Node values of a function on a grid, optionally with harmonic coefficients.

    ``coeffs`` entries are ``(index, a_i, beta_i)`` where ``index`` is
    ``(l, m)`` for full harmonics on S^2 and ``(k,)`` for zonal harmonics.
    ``func`` is the ambient function the values were sampled from, if any.
    """

    grid: QuadratureGrid
    values: np.ndarray
    coeffs: list | None = None
    residual: float | None = None
    func: object | None = field(default=None, repr=False)

    def __post_init__(self):
        if np.shape(self.values) != (len(self.grid),):
            raise ValueError(f"field has {np.shape(self.values)} values for {len(self.grid)} nodes")

    @classmethod
    def from_function(cls, grid: QuadratureGrid, func) -> "ScalarField":
        return cls(grid, np.asarray(func.value(grid.unit_points), float), func=func)

    def coefficient(self, index) -> float:
        for idx, a, _ in self.coeffs or ():
            if tuple(idx) == tuple(index):
                return a
        raise KeyError(index)

    def synthesize(self) -> np.ndarray:
        """Rebuild node values from the stored coefficients."""
        if self.coeffs is None:
            raise ValueError("field carries no harmonic coefficients")
        basis = _basis_matrix(self.grid, [c[0] for c in self.coeffs])
        return basis @ np.array([c[1] for c in self.coeffs])

    def to_json(self) -> str:
        return json.dumps(self.grid.to_dict(self.values))


def field_from_json(text: str) -> ScalarField:
    data = json.loads(text)
    grid = grid_from_dict(data)
    return ScalarField(grid, np.asarray(data["values"], float))


def integrate(field: ScalarField, grid: QuadratureGrid | None = None) -> float:
    """Quadrature of a field (compensated summation, order independent)."""
    if grid is not None and grid is not field.grid:
        same = (
            grid.dim == field.grid.dim
            and len(grid) == len(field.grid)
            and np.array_equal(grid.weights, field.grid.weights)
        )
        if not same:
            raise ValueError("field is defined on a different grid")
    return field.grid.integrate(field.values)


# ---------------------------------------------------------------------------
# harmonics
# ---------------------------------------------------------------------------


def laplacian_eigenvalue(n: int, k: int) -> int:
    """Eigenvalue k(k+n-1) of -Delta on degree-k harmonics of S^n."""
    if n < 2 or k < 0:
        raise ValueError("need n >= 2 and k >= 0")
    return k * (k + n - 1)


def _normalized_legendre(lmax: int, x: np.ndarray) -> dict:
    """Orthonormal associated Legendre functions p[l, m](x), 0 <= m <= l <= lmax.

    Normalized so that ``p[l,m](cos t) * e^{i m phi}`` has unit L^2 norm on S^2.
    """
    x = np.asarray(x, float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    p: dict = {}
    pmm = np.full_like(x, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(lmax + 1):
        if m > 0:
            pmm = pmm * s * math.sqrt((2.0 * m + 1.0) / (2.0 * m))
        p[m, m] = pmm
        if m < lmax:
            p[m + 1, m] = math.sqrt(2.0 * m + 3.0) * x * pmm
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p[l, m] = a * (x * p[l - 1, m] - b * p[l - 2, m])
    return p


def spherical_harmonic(l: int, m: int, point) -> np.ndarray:
    """Real orthonormal Y_lm at unit points of S^2 (shape ``(..., 3)``)."""
    if abs(m) > l:
        raise ValueError(f"|m|={abs(m)} exceeds degree l={l}")
    pt = np.asarray(point, float)
    if pt.shape[-1] != 3:
        raise ValueError("spherical harmonics are defined here for S^2 points only")
    z = np.clip(pt[..., 2], -1.0, 1.0)
    phi = np.arctan2(pt[..., 1], pt[..., 0])
    p = _normalized_legendre(l, z)[l, abs(m)]
    if m == 0:
        return p
    if m > 0:
        return math.sqrt(2.0) * p * np.cos(m * phi)
    return math.sqrt(2.0) * p * np.sin(-m * phi)


def zonal_harmonic(n: int, k: int, theta) -> np.ndarray:
    """Unit-norm degree-k zonal harmonic of S^n at polar angle ``theta``."""
    th = np.asarray(theta, float)
    if np.any(th < 0.0) or np.any(th > math.pi):
        raise ValueError("polar angle must lie in [0, pi]")
    alpha = (n - 1) / 2.0
    x = np.cos(th)
    c_prev = np.ones_like(x)
    if k == 0:
        c = c_prev
    else:
        c = 2.0 * alpha * x
        for j in range(2, k + 1):
            c_prev, c = c, (2.0 * x * (j + alpha - 1.0) * c - (j + 2.0 * alpha - 2.0) * c_prev) / j
    return zonal_normalization(n, k) * c


def harmonic_indices(n: int, k_max: int, zonal: bool) -> list[tuple]:
    if zonal:
        return [(k,) for k in range(k_max + 1)]
    return [(l, m) for l in range(k_max + 1) for m in range(-l, l + 1)]


def _basis_matrix(grid: QuadratureGrid, indices) -> np.ndarray:
    cols = []
    for idx in indices:
        if len(idx) == 1:
            cols.append(zonal_harmonic(grid.dim, idx[0], grid.polar))
        else:
            cols.append(spherical_harmonic(idx[0], idx[1], grid.unit_points))
    return np.stack(cols, axis=-1)


def is_zonal(field: ScalarField, tol: float = 1e-10) -> bool:
    """True when node values depend on the polar angle only."""
    grid = field.grid
    if grid.zonal:
        return True
    scale = max(1.0, float(np.max(np.abs(field.values))))
    _, inverse = np.unique(grid.polar, return_inverse=True)
    lo = np.full(inverse.max() + 1, np.inf)
    hi = np.full(inverse.max() + 1, -np.inf)
    np.minimum.at(lo, inverse, field.values)
    np.maximum.at(hi, inverse, field.values)
    return bool(np.max(hi - lo) <= tol * scale)


def project_onto_harmonics(field: ScalarField, k_max: int = 12) -> ScalarField:
    """Coefficients ``a_i = <f, phi_i>`` up to degree ``k_max`` plus the L^2 residual.

    S^2 uses the full real spherical harmonic basis; higher dimensions only the
    zonal basis, so non-zonal fields there raise :class:`UnsupportedBasisError`.
    """
    grid = field.grid
    n = grid.dim
    if n == 2 and not grid.zonal:
        zonal = False
    elif is_zonal(field):
        zonal = True
    else:
        raise UnsupportedBasisError(
            f"only zonal harmonics are available on S^{n}; the field varies along the non-polar angles"
        )
    indices = harmonic_indices(n, k_max, zonal)
    basis = _basis_matrix(grid, indices)
    coeffs_arr = np.einsum("pk,p->k", basis, field.values * grid.weights)
    resid_vals = field.values - basis @ coeffs_arr
    residual = math.sqrt(max(grid.integrate(resid_vals**2), 0.0))
    coeffs = [
        (idx, float(a), laplacian_eigenvalue(n, idx[0]))
        for idx, a in zip(indices, coeffs_arr)
    ]
    return ScalarField(grid, field.values, coeffs=coeffs, residual=residual, func=field.func)
