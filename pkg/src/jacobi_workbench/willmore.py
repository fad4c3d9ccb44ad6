"""Willmore functionals, their variations at the sphere, and a random-shape scan.

The normalized functional of a closed hypersurface ``M^n`` is

    W(M) = 1 / (n vol S^n) * int_M (nH)^2 dM,

which equals ``n`` on the unit sphere and, for n = 2, coincides with the
classical ``(1 / 2 pi) int H^2 dS``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .fields import LinearCombination, TranslatedSphereRadius, solid_harmonic, sphere_volume, zonal_polynomial
from .finite_diff import richardson
from .geometry import GeometryJet, chart_derivatives, embedding_jet, radial_geometry, shape_geometry
from .jet import Jet2
from .sphere import QuadratureGrid, ScalarField, make_grid, project_onto_harmonics
from .variation import RadialVariation, phi_prime0

__all__ = [
    "ProjectionResidualError",
    "ScanReport",
    "ShapeFamily",
    "StabilityPolynomial",
    "WillmoreCurve",
    "conjecture_scan",
    "stability_polynomial",
    "willmore_classical",
    "willmore_curve",
    "willmore_first_variation",
    "willmore_normalized",
    "willmore_of_geometry",
    "willmore_second_variation_fd",
    "willmore_second_variation_spectral",
    "willmore_shape",
]


class ProjectionResidualError(ValueError):
    def __init__(self, residual: float, tol: float):
        self.residual = residual
        super().__init__(f"harmonic projection residual {residual:.3e} exceeds {tol:.1e}; raise k_max")


def willmore_of_geometry(geom: GeometryJet, grid: QuadratureGrid) -> float:
    n = grid.dim
    integrand = geom.H_big.v**2 * geom.area_ratio.v
    return grid.integrate(integrand) / (n * sphere_volume(n))


def area_of_geometry(geom: GeometryJet, grid: QuadratureGrid) -> float:
    return grid.integrate(geom.area_ratio.v)


def willmore_normalized(variation: RadialVariation, t: float) -> float:
    """``W(t)`` for the volume-preserving family ``X_t``."""
    return willmore_of_geometry(embedding_jet(variation, variation.grid.frame, t), variation.grid)


def willmore_shape(radius_func, grid: QuadratureGrid, scale: float = 1.0) -> float:
    """Normalized functional of the radial graph ``scale * radius_func``."""
    return willmore_of_geometry(shape_geometry(radius_func, grid.frame, scale), grid)


def willmore_classical(radius_func, grid: QuadratureGrid, scale: float = 1.0, with_error: bool = False):
    """``(1 / 2 pi) int H^2 dS`` for a closed surface in R^3 given as a radial graph.

    With ``with_error`` the value at twice the resolution is returned together
    with the change from the base resolution as an error bar.
    """
    if grid.dim != 2:
        raise ValueError("the classical functional is defined for surfaces in R^3")

    def value(g):
        geom = shape_geometry(radius_func, g.frame, scale)
        return g.integrate(geom.H.v**2 * geom.area_ratio.v) / (2.0 * math.pi)

    w = value(grid)
    if not with_error:
        return w
    fine = value(make_grid(2, 2 * grid.resolution))
    return fine, abs(fine - w)


def area_normalizing_scale(radius_func, grid: QuadratureGrid) -> float:
    """Factor ``c`` with ``vol(c * M) = vol(S^n)`` (volume scales as ``c^n``)."""
    geom = shape_geometry(radius_func, grid.frame)
    area = area_of_geometry(geom, grid)
    return (sphere_volume(grid.dim) / area) ** (1.0 / grid.dim)


# ---------------------------------------------------------------------------
# variations at t = 0
# ---------------------------------------------------------------------------


def _fd_step(variation: RadialVariation) -> float:
    return min(0.02, variation.t_max / 4.0)


def willmore_first_variation(variation: RadialVariation, h: float | None = None) -> dict:
    """Closed form ``(-2n / vol) int (f + phi'(0))`` and a Richardson estimate of ``W'(0)``."""
    n = variation.n
    u = variation.f_values + phi_prime0(variation)
    closed = -2.0 * n / variation.volume * variation.grid.integrate(u)
    h = _fd_step(variation) if h is None else h
    fd, err = richardson(lambda t: willmore_normalized(variation, t), 0.0, h, 1, with_error=True)
    return {"closed": closed, "fd": float(fd), "fd_error": float(err)}


def willmore_second_variation_fd(variation: RadialVariation, h: float | None = None) -> tuple[float, float]:
    h = _fd_step(variation) if h is None else h
    val, err = richardson(lambda t: willmore_normalized(variation, t), 0.0, h, 2, with_error=True)
    return float(val), float(err)


def willmore_second_variation_jet(variation: RadialVariation) -> float:
    """``W''(0)`` from the forward-mode second derivative of the integrand."""
    geom = embedding_jet(variation, variation.grid.frame, 0.0)
    dens = (geom.H_big * geom.H_big) * geom.area_ratio
    return variation.grid.integrate(dens.d2) / (variation.n * variation.volume)


@dataclass(frozen=True)
class StabilityPolynomial:
    """``2 b^2 - (6n - 2n^2) b + (4n^2 - 2n^3)`` with roots ``2n - n^2`` and ``n``."""

    n: int
    coefficients: tuple
    roots: tuple

    def __call__(self, beta):
        a, b, c = self.coefficients
        if isinstance(beta, (int, np.integer)):
            return a * beta * beta + b * beta + c
        beta = np.asarray(beta, float)
        return a * beta * beta + b * beta + c


def stability_polynomial(n: int) -> StabilityPolynomial:
    if n < 2:
        raise ValueError("n must be >= 2")
    return StabilityPolynomial(n, (2, -(6 * n - 2 * n * n), 4 * n * n - 2 * n**3), (2 * n - n * n, n))


def willmore_second_variation_spectral(
    variation: RadialVariation, k_max: int = 12, tol: float = 1e-8, detail: bool = False
):
    """``W''(0) = 1/(n vol) sum_i a_i^2 P(beta_i)`` over the harmonic coefficients of ``f + phi'(0)``.

    Refuses (``ProjectionResidualError``) when the projection residual exceeds ``tol``.
    """
    n = variation.n
    u = variation.f_values + phi_prime0(variation)
    proj = project_onto_harmonics(ScalarField(variation.grid, u), k_max)
    if proj.residual > tol:
        raise ProjectionResidualError(proj.residual, tol)
    poly = stability_polynomial(n)
    modes = [(idx, a, beta, float(poly(beta)), a * a * float(poly(beta)) / (n * variation.volume)) for idx, a, beta in proj.coeffs]
    value = math.fsum(m[4] for m in modes)
    if detail:
        return value, {"residual": proj.residual, "modes": [m for m in modes if abs(m[1]) > 1e-12]}
    return value


@dataclass
class WillmoreCurve:
    t_grid: list
    values: list
    errors: list
    first_variation_fd: float
    first_variation_closed: float
    second_variation_fd: float
    second_variation_fd_error: float
    spectral_second_variation: float | None
    mode_table: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["t", "value", "error_estimate"])
        for t, v, e in zip(self.t_grid, self.values, self.errors):
            w.writerow([repr(float(t)), repr(float(v)), repr(float(e))])
        return buf.getvalue()

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("values")
        d.pop("errors")
        d["min_value"] = min(self.values)
        d["argmin_t"] = self.t_grid[int(np.argmin(self.values))]
        return d


def willmore_curve(variation: RadialVariation, t_grid, k_max: int = 12, refine: bool = True) -> WillmoreCurve:
    """Sample ``W(t)`` with a resolution-doubling error bar and collect the variations."""
    t_grid = [float(t) for t in t_grid]
    values = [willmore_normalized(variation, t) for t in t_grid]
    if refine and not variation.grid.zonal:
        fine = RadialVariation(variation.func, make_grid(variation.n, 2 * variation.grid.resolution), variation.t_max)
    elif refine:
        fine = RadialVariation(variation.func, make_grid(variation.n, 2 * variation.grid.resolution, zonal=True), variation.t_max)
    errors = [abs(willmore_normalized(fine, t) - v) if refine else 0.0 for t, v in zip(t_grid, values)]
    first = willmore_first_variation(variation)
    second, second_err = willmore_second_variation_fd(variation)
    try:
        spectral, info = willmore_second_variation_spectral(variation, k_max, detail=True)
        modes = [
            {"index": list(idx), "coefficient": a, "beta": beta, "polynomial": p, "contribution": c}
            for idx, a, beta, p, c in info["modes"]
        ]
    except (ProjectionResidualError, ValueError):
        spectral, modes = None, []
    return WillmoreCurve(t_grid, values, errors, first["fd"], first["closed"], second, second_err, spectral, modes)


def translation_family_willmore(direction, t: float, grid: QuadratureGrid) -> tuple[float, float]:
    """``W`` and the sphere residual of the exact translation family ``|X - t a| = 1``.

    ``direction`` holds the coefficients ``a`` of ``f = <a, y>``; to first
    order in ``t`` this family agrees with ``1 + t f``.
    """
    beta = tuple(t * np.asarray(direction, float))
    rad = TranslatedSphereRadius(beta)
    geom = shape_geometry(rad, grid.frame)
    X = geom.X.v
    resid = float(np.max(np.abs(np.linalg.norm(X - np.asarray(beta), axis=1) - 1.0)))
    return willmore_of_geometry(geom, grid), resid


# ---------------------------------------------------------------------------
# conjecture scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShapeFamily:
    """Random band-limited radial graphs ``1 + amplitude * g`` with ``max |g| = 1``.

    ``g`` is a Gaussian combination of harmonics of degree 1..``band`` (zonal
    ones when ``zonal`` or ``n > 2``), weighted by ``1 / (1 + degree)``.
    """

    n: int = 2
    amplitude: float = 0.2
    band: int = 4
    zonal: bool = False

    @property
    def uses_zonal(self) -> bool:
        return self.zonal or self.n > 2

    def basis(self) -> list:
        if self.uses_zonal:
            return [(k, zonal_polynomial(self.n, k)) for k in range(1, self.band + 1)]
        return [(l, solid_harmonic(l, m)) for l in range(1, self.band + 1) for m in range(-l, l + 1)]

    def draw(self, rng: np.random.Generator, basis) -> np.ndarray:
        """Raw basis weights ``c_k / (1 + deg_k)`` before amplitude scaling."""
        coeffs = rng.standard_normal(len(basis))
        return np.array([c / (1.0 + deg) for c, (deg, _) in zip(coeffs, basis)])

    @staticmethod
    def radius(weights, basis) -> LinearCombination:
        """The radial function ``1 + sum w_k p_k`` for already-scaled weights."""
        return LinearCombination(tuple((float(w), p) for w, (_, p) in zip(weights, basis)), offset=1.0)


class _BasisTable:
    """Chart derivatives of every basis polynomial on one grid, so that
    a random shape costs a few tensor contractions instead of polynomial
    evaluations."""

    def __init__(self, basis, grid: QuadratureGrid):
        self.grid = grid
        parts = [chart_derivatives(p, grid.frame) for _, p in basis]
        self.val = np.stack([p[0] for p in parts])
        self.d1 = np.stack([p[1] for p in parts])
        self.d2 = np.stack([p[2] for p in parts])

    def gmax(self, weights) -> float:
        return float(np.max(np.abs(weights @ self.val)))

    def willmore(self, weights, offset: float = 1.0) -> tuple[float, float]:
        """(W after volume normalization, min radius) of ``offset + weights . basis``."""
        r = offset + np.tensordot(weights, self.val, axes=1)
        dr = np.tensordot(weights, self.d1, axes=1)
        ddr = np.tensordot(weights, self.d2, axes=1)
        if np.min(r) <= 0.0:
            return float("nan"), float(np.min(r))
        geom = radial_geometry(self.grid.frame, Jet2(r), Jet2(dr), Jet2(ddr))
        # W is scale invariant, so the volume normalization does not change it;
        # it is applied anyway to report the normalized shape faithfully.
        area = area_of_geometry(geom, self.grid)
        c = (sphere_volume(self.grid.dim) / area) ** (1.0 / self.grid.dim)
        geom = radial_geometry(self.grid.frame, Jet2(c * r), Jet2(c * dr), Jet2(c * ddr))
        return willmore_of_geometry(geom, self.grid), float(np.min(r))


@dataclass
class ScanRow:
    sample_id: int
    value: float
    error_estimate: float
    attempts: int


@dataclass
class ScanReport:
    rows: list
    family: ShapeFamily
    seed: int
    resolution: int
    rejected: int
    violations: list
    near_equality: list

    @property
    def min_value(self) -> float:
        return min(r.value for r in self.rows)

    @property
    def argmin(self) -> int:
        return min(self.rows, key=lambda r: r.value).sample_id

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["sample_id", "value", "error_estimate"])
        for r in self.rows:
            w.writerow([r.sample_id, repr(float(r.value)), repr(float(r.error_estimate))])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "family": asdict(self.family),
            "shape_class": "band-limited radial graphs at unit-sphere volume (a subclass of genus-0 hypersurfaces)",
            "seed": self.seed,
            "resolution": self.resolution,
            "samples": len(self.rows),
            "min_value": self.min_value,
            "argmin_sample": self.argmin,
            "violations": self.violations,
            "violation_count": len(self.violations),
            "rejected": self.rejected,
            "near_equality": self.near_equality,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _scan_grid(family: ShapeFamily, resolution: int) -> QuadratureGrid:
    return make_grid(family.n, resolution, zonal=family.uses_zonal)


def conjecture_scan(
    family: ShapeFamily,
    samples: int = 100,
    seed: int = 0,
    resolution: int | None = None,
    threads: int = 1,
    tol: float = 1e-10,
    max_attempts: int = 20,
) -> ScanReport:
    """Evaluate ``W`` on random volume-normalized shapes of ``family``.

    Each sample draws from its own stream ``SeedSequence([seed, id, attempt])``
    so results do not depend on scheduling.  Samples with a non-positive
    radius are redrawn and counted as rejected.  Every value below
    ``n - tol`` is recomputed at twice the resolution before it is reported
    as a violation.
    """
    n = family.n
    if resolution is None:
        resolution = 64 if family.uses_zonal else 32
    basis = family.basis()
    coarse = _BasisTable(basis, _scan_grid(family, resolution))
    fine_table = _BasisTable(basis, _scan_grid(family, 2 * resolution))

    def run(sample_id: int):
        rejected = 0
        for attempt in range(max_attempts):
            rng = np.random.default_rng(np.random.SeedSequence([seed, sample_id, attempt]))
            weights = family.draw(rng, basis)
            gmax = coarse.gmax(weights)
            weights = weights * (family.amplitude / gmax) if gmax > 0 else weights * 0.0
            fine, rmin = fine_table.willmore(weights)
            if rmin <= 0.0:
                rejected += 1
                continue
            value, _ = coarse.willmore(weights)
            return ScanRow(sample_id, value, abs(fine - value), attempt + 1), rejected, weights, fine
        raise RuntimeError(f"sample {sample_id}: no embedded shape in {max_attempts} attempts")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(samples)))
    else:
        results = [run(i) for i in range(samples)]

    rows = [r[0] for r in results]
    violations = []
    near = []
    for row, _, _, fine in results:
        if row.value < n - tol and fine < n - tol:
            violations.append({"sample_id": row.sample_id, "value": row.value, "refined_value": fine})
        if row.value < n + 1e-6:
            near.append({"sample_id": row.sample_id, "value": row.value})
    return ScanReport(rows, family, seed, resolution, sum(r[1] for r in results), violations, near)
