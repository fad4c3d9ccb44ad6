"""Volume-preserving radial variations of the unit sphere.

``X_t = (1 + t f + phi(t)) Phi`` where the scalar ``phi(t)`` keeps the
n-dimensional volume of ``X_t(S^n)`` equal to ``vol(S^n)``.  The volume of a
radial graph ``rho Phi`` is ``int rho^(n-1) sqrt(rho^2 + |grad rho|^2) dS^n``;
``phi(t)`` is found by Newton's method on that constraint and its first two
derivatives by implicit differentiation.

The module also evaluates the closed-form first and second t-derivatives of
the metric, its inverse, the volume density, the normal, the second
fundamental form, ``H`` and ``H^2`` at ``t = 0`` and pairs them with the
forward-mode values of :mod:`.geometry` and with finite differences.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .fields import sphere_volume
from .finite_diff import richardson
from .geometry import chart_derivatives, embedding_jet
from .jet import Jet2
from .sphere import ChartFrame, QuadratureGrid, ScalarField, frames_at_points

__all__ = [
    "ConvergenceError",
    "DerivativeEntry",
    "RadialVariation",
    "VariationDerivatives",
    "lemma2_eval",
    "lemma3_eval",
    "phi_prime0",
    "phi_second0",
    "solve_phi",
]

QUANTITIES = ("g", "g_inv", "sqrt_g", "normal", "h", "H", "H2")


class ConvergenceError(RuntimeError):
    pass


def _rotate_about_axis(points: np.ndarray, angle: float) -> np.ndarray:
    out = points.copy()
    c, s = math.cos(angle), math.sin(angle)
    out[..., 0] = c * points[..., 0] - s * points[..., 1]
    out[..., 1] = s * points[..., 0] + c * points[..., 1]
    return out


class RadialVariation:
    """The family ``X_t`` for a perturbation direction ``func`` (an ambient function).

    Parameters
    ----------
    func : ambient function
        Anything with ``value``, ``grad`` and ``hess`` on R^{n+1}.
    grid : QuadratureGrid
        Quadrature used for every volume integral.  A zonal grid requires a
        zonal ``func``.
    t_max : float, optional
        Half-width of the admissible parameter interval; defaults to
        ``0.1 / max(1, max |f|)``.
    """

    def __init__(self, func, grid: QuadratureGrid, t_max: float | None = None):
        self.func = func
        self.grid = grid
        self.n = grid.dim
        frame = grid.frame
        f, df, _ = chart_derivatives(func, frame)
        ginv = np.linalg.inv(frame.metric)
        self.f_values = f
        self.grad_sq = np.einsum("pi,pij,pj->p", df, ginv, df)
        self.field = ScalarField(grid, f, func=func)
        if grid.zonal:
            self._check_zonal()
        self.fmax = float(np.max(np.abs(f)))
        self.t_max = 0.1 / max(1.0, self.fmax) if t_max is None else float(t_max)
        self.volume = sphere_volume(self.n)
        self._cache: dict[float, tuple[float, float]] = {}
        self._lock = threading.Lock()

    def _check_zonal(self):
        pts = self.grid.unit_points
        ref = self.func.value(pts)
        for angle in (0.7, 2.1):
            moved = _rotate_about_axis(pts, angle)
            if self.n > 2:
                moved = moved.copy()
                moved[..., [0, 2]] = moved[..., [2, 0]]
            if np.max(np.abs(self.func.value(moved) - ref)) > 1e-10 * max(1.0, np.max(np.abs(ref))):
                raise ValueError("a zonal grid needs a zonal perturbation direction")

    # -- volume functional ---------------------------------------------------
    def volume_at(self, t: float, s: float) -> float:
        """n-volume of the radial graph ``(1 + t f + s) Phi``."""
        rho = 1.0 + t * self.f_values + s
        dens = rho ** (self.n - 1) * np.sqrt(rho * rho + t * t * self.grad_sq)
        return self.grid.integrate(dens)

    def _volume_ds(self, t: float, s: float) -> float:
        rho = 1.0 + t * self.f_values + s
        q = np.sqrt(rho * rho + t * t * self.grad_sq)
        dens = (self.n - 1) * rho ** (self.n - 2) * q + rho**self.n / q
        return self.grid.integrate(dens)

    def volume_jet(self, t: float, s: float, dt: float, ds: float) -> Jet2:
        """Volume along the line ``(t + e dt, s + e ds)`` as a jet in ``e``."""
        rho = Jet2(1.0 + t * self.f_values + s, dt * self.f_values + ds)
        grad_sq = Jet2(t * t * self.grad_sq, 2.0 * t * dt * self.grad_sq, 2.0 * dt * dt * self.grad_sq)
        dens = (rho * rho + grad_sq).sqrt()
        if self.n > 1:
            dens = dens * rho ** (self.n - 1)
        return Jet2(
            self.grid.integrate(dens.v),
            self.grid.integrate(dens.d1),
            self.grid.integrate(dens.d2),
        )

    # -- phi -----------------------------------------------------------------
    def _admissible(self, t: float, s: float) -> bool:
        return abs(t) * self.fmax + abs(s) < 0.5

    def solve(self, t: float) -> float:
        t = float(t)
        with self._lock:
            hit = self._cache.get(t)
        if hit is not None:
            return hit[0]
        if abs(t) > self.t_max * (1.0 + 1e-12):
            raise ValueError(f"|t|={abs(t)} exceeds t_max={self.t_max}")
        target = self.volume
        s = phi_prime0(self) * t
        resid = math.inf
        prev = math.inf
        for _ in range(50):
            if not self._admissible(t, s):
                raise ConvergenceError(f"phi left the admissible band at t={t} (s={s})")
            resid = self.volume_at(t, s) - target
            step = resid / self._volume_ds(t, s)
            s -= step
            # stop at the rounding floor: a tiny step, or one that no longer shrinks
            if abs(step) <= 1e-16 * (1.0 + abs(s)) or (abs(step) < 1e-13 and abs(step) >= 0.5 * prev):
                resid = self.volume_at(t, s) - target
                break
            prev = abs(step)
        else:
            raise ConvergenceError(f"Newton did not converge in 50 iterations at t={t}")
        if abs(resid) / target > 1e-12:
            raise ConvergenceError(f"volume residual {abs(resid) / target:.2e} at t={t}")
        with self._lock:
            self._cache[t] = (s, abs(resid) / target)
        return s

    def residual(self, t: float) -> float:
        self.solve(t)
        return self._cache[float(t)][1]

    def phi_jet(self, t: float) -> tuple[float, float, float]:
        """``phi(t), phi'(t), phi''(t)`` by implicit differentiation of the constraint."""
        s = 0.0 if t == 0.0 else self.solve(t)
        f_s = self.volume_jet(t, s, 0.0, 1.0).d1
        f_t = self.volume_jet(t, s, 1.0, 0.0).d1
        dphi = -f_t / f_s
        ddphi = -self.volume_jet(t, s, 1.0, dphi).d2 / f_s
        return s, dphi, ddphi

    def radius(self, t: float) -> np.ndarray:
        return 1.0 + t * self.f_values + self.solve(t)


def solve_phi(variation: RadialVariation, t: float) -> float:
    """Volume-preserving correction ``phi(t)`` (relative residual <= 1e-12)."""
    return variation.solve(t)


def phi_prime0(variation: RadialVariation) -> float:
    """``phi'(0) = -(1/vol S^n) int f``."""
    return -variation.grid.integrate(variation.f_values) / variation.volume


def phi_second0(variation: RadialVariation) -> float:
    """``phi''(0) = -(1/(n vol S^n)) int [|grad f|^2 + (n^2 - n)(f + phi'(0))^2]``."""
    n = variation.n
    u = variation.f_values + phi_prime0(variation)
    integrand = variation.grad_sq + (n * n - n) * u * u
    return -variation.grid.integrate(integrand) / (n * variation.volume)


def phi_diagnostics(variation: RadialVariation, h: float | None = None) -> dict:
    """Compare the closed-form phi'(0), phi''(0) with differences of the solved phi.

    Also reports the alternative normalization ``-(1/(n vol)) int f`` of
    ``phi'(0)``, which disagrees with the finite-difference slope whenever
    ``int f != 0``.
    """
    h = min(0.01, variation.t_max / 4.0) if h is None else h
    fd1 = float(richardson(variation.solve, 0.0, h, 1))
    fd2 = float(richardson(variation.solve, 0.0, h, 2))
    p1 = phi_prime0(variation)
    p2 = phi_second0(variation)
    alt = p1 / variation.n
    return {
        "phi_prime0": p1,
        "phi_second0": p2,
        "fd_phi_prime0": fd1,
        "fd_phi_second0": fd2,
        "err_phi_prime0": abs(fd1 - p1),
        "err_phi_second0": abs(fd2 - p2),
        "phi_prime0_over_n_variant": alt,
        "err_over_n_variant": abs(fd1 - alt),
        "over_n_variant_consistent": bool(abs(fd1 - alt) <= 1e-6),
        "mean_zero_identity": variation.grid.integrate(variation.f_values + p1),
    }


def volume_conservation(variation: RadialVariation, npoints: int = 21) -> dict:
    ts = np.linspace(-variation.t_max, variation.t_max, npoints)
    rel = [abs(variation.volume_at(t, variation.solve(t)) - variation.volume) / variation.volume for t in ts]
    return {"t": ts.tolist(), "relative_error": rel, "max_relative_error": max(rel)}


def translation_residual(variation: RadialVariation, t: float) -> float:
    """``max | |X_t - c(t)| - 1 |`` over grid nodes, ``c(t)`` the surface centroid."""
    geom = embedding_jet(variation, variation.grid.frame, t)
    w = variation.grid.weights * geom.area_ratio.v
    X = geom.X.v
    c = np.array([math.fsum(w * X[:, a]) for a in range(X.shape[1])]) / math.fsum(w)
    return float(np.max(np.abs(np.linalg.norm(X - c, axis=1) - 1.0)))


# ---------------------------------------------------------------------------
# closed-form derivatives at t = 0
# ---------------------------------------------------------------------------


@dataclass
class DerivativeEntry:
    closed: np.ndarray
    jet: np.ndarray
    fd: np.ndarray | None = None

    @staticmethod
    def _rel(a, b) -> np.ndarray:
        a = np.asarray(a)
        b = np.asarray(b)
        axes = tuple(range(1, a.ndim))
        diff = np.sqrt(np.sum((a - b) ** 2, axis=axes)) if axes else np.abs(a - b)
        na = np.sqrt(np.sum(a * a, axis=axes)) if axes else np.abs(a)
        nb = np.sqrt(np.sum(b * b, axis=axes)) if axes else np.abs(b)
        return diff / np.maximum(np.maximum(na, nb), 1.0)

    @property
    def abs_err(self) -> float:
        return float(np.max(np.abs(self.closed - self.jet)))

    @property
    def rel_err(self) -> float:
        """Worst pointwise ``|closed - jet| / max(|closed|, |jet|, 1)`` (Frobenius norms)."""
        return float(np.max(self._rel(self.closed, self.jet)))

    @property
    def fd_rel_err(self) -> float | None:
        if self.fd is None:
            return None
        return float(np.max(self._rel(self.jet, self.fd)))


@dataclass
class VariationDerivatives:
    order: int
    entries: dict = field(default_factory=dict)

    def worst(self) -> tuple[str, float]:
        name = max(self.entries, key=lambda k: self.entries[k].rel_err)
        return name, self.entries[name].rel_err

    def table(self) -> list[dict]:
        rows = []
        for i, name in enumerate(QUANTITIES, start=1):
            e = self.entries[name]
            rows.append(
                {
                    "item": f"{self.order}.{i}",
                    "quantity": name,
                    "max_abs_err": e.abs_err,
                    "max_rel_err": e.rel_err,
                    "fd_rel_err": e.fd_rel_err,
                }
            )
        return rows


def _round_data(variation: RadialVariation, frame: ChartFrame):
    f, df, ddf = chart_derivatives(variation.func, frame)
    g0 = frame.metric
    ginv0 = np.linalg.inv(g0)
    grad_vec = np.einsum("pij,pi,pja->pa", ginv0, df, frame.dPhi)
    grad_sq = np.einsum("pi,pij,pj->p", df, ginv0, df)
    hess = ddf - np.einsum("pija,pa->pij", frame.ddPhi, grad_vec)
    lap = np.einsum("pij,pij->p", ginv0, hess)
    return f, df, g0, ginv0, grad_vec, grad_sq, hess, lap


def _jet_quantities(geom) -> dict:
    return {
        "g": geom.g,
        "g_inv": geom.g_inv,
        "sqrt_g": geom.sqrt_g,
        "normal": geom.normal,
        "h": geom.h,
        "H": geom.H,
        "H2": geom.H * geom.H,
    }


def _fd_quantities(variation, frame, order: int, h: float) -> dict:
    cache: dict = {}

    def at(t):
        if t not in cache:
            cache[t] = {k: v.v for k, v in _jet_quantities(embedding_jet(variation, frame, t)).items()}
        return cache[t]

    return {name: richardson(lambda t, nm=name: at(t)[nm], 0.0, h, order) for name in QUANTITIES}


def _resolve_frame(chart_points) -> ChartFrame:
    return chart_points if isinstance(chart_points, ChartFrame) else frames_at_points(chart_points)


def lemma2_closed_forms(variation: RadialVariation, frame: ChartFrame) -> dict:
    n = variation.n
    f, _, g0, ginv0, grad_vec, _, hess, lap = _round_data(variation, frame)
    u = f + phi_prime0(variation)
    return {
        "g": 2.0 * u[:, None, None] * g0,
        "g_inv": -2.0 * u[:, None, None] * ginv0,
        "sqrt_g": n * u * frame.sqrt_det,
        "normal": -grad_vec,
        "h": u[:, None, None] * g0 - hess,
        "H": -u - lap / n,
        "H2": -2.0 * u - 2.0 * lap / n,
    }


def lemma3_closed_forms(variation: RadialVariation, frame: ChartFrame) -> dict:
    n = variation.n
    f, df, g0, ginv0, grad_vec, grad_sq, _, lap = _round_data(variation, frame)
    u = f + phi_prime0(variation)
    pp = phi_second0(variation)
    dfdf = df[:, :, None] * df[:, None, :]
    u2 = (u * u)[:, None, None]
    raised = np.einsum("pik,pkl,plj->pij", ginv0, dfdf, ginv0)
    return {
        "g": 2.0 * dfdf + 2.0 * u2 * g0 + 2.0 * pp * g0,
        "g_inv": -2.0 * raised + 6.0 * u2 * ginv0 - 2.0 * pp * ginv0,
        "sqrt_g": (grad_sq + (n * n - n) * u * u + n * pp) * frame.sqrt_det,
        "normal": 2.0 * u[:, None] * grad_vec - grad_sq[:, None] * frame.Phi,
        "h": pp * g0 + 4.0 * dfdf - grad_sq[:, None, None] * g0,
        "H": (2.0 - n) / n * grad_sq + 2.0 * u * u - pp + 4.0 / n * u * lap,
        "H2": 6.0 * u * u
        + 12.0 / n * u * lap
        + 2.0 / n**2 * lap * lap
        + (4.0 - 2.0 * n) / n * grad_sq
        - 2.0 * pp,
    }


def _evaluate(variation, chart_points, order: int, with_fd: bool, h: float | None, sign_fault: str | None):
    frame = _resolve_frame(chart_points)
    closed = (lemma2_closed_forms if order == 1 else lemma3_closed_forms)(variation, frame)
    if sign_fault is not None:
        closed[sign_fault] = -closed[sign_fault]
    geom = embedding_jet(variation, frame, 0.0)
    jets = _jet_quantities(geom)
    fd = None
    if with_fd:
        h = min(0.01, variation.t_max / 4.0) if h is None else h
        fd = _fd_quantities(variation, frame, order, h)
    out = VariationDerivatives(order)
    for name in QUANTITIES:
        out.entries[name] = DerivativeEntry(
            np.asarray(closed[name]), jets[name].part(order), None if fd is None else np.asarray(fd[name])
        )
    return out


def lemma2_eval(variation, chart_points, with_fd: bool = False, h=None, sign_fault=None) -> VariationDerivatives:
    """First t-derivatives at ``t = 0``: closed forms paired with forward-mode values.

    ``chart_points`` is a :class:`ChartFrame` or an array of unit points (a
    regular rotated chart is used at each).  ``sign_fault`` flips one closed
    form and exists only to test the checking harness.
    """
    return _evaluate(variation, chart_points, 1, with_fd, h, sign_fault)


def lemma3_eval(variation, chart_points, with_fd: bool = False, h=None, sign_fault=None) -> VariationDerivatives:
    """Second t-derivatives at ``t = 0`` with ``phi`` spatially constant."""
    return _evaluate(variation, chart_points, 2, with_fd, h, sign_fault)
