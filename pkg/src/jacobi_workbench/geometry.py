"""Second-order geometry of radial graphs with exact t-derivatives.

A radial graph over S^n is ``X = rho * Phi`` with ``rho > 0``.  Given the jets
(in ``t``) of ``rho`` and of its first and second chart derivatives, this
module builds the tangent vectors and from them the metric, its inverse, the
volume density, the outward unit normal, the second fundamental form
``h_ij = <X_i, N_j> = -<X_ij, N>``, the normalized mean curvature ``H``, the
unnormalized ``nH`` and ``|II|^2``, each as a :class:`~.jet.Jet2`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet as J
from .jet import Jet2
from .sphere import ChartFrame, frames_at_points

__all__ = [
    "DegenerateGeometryError",
    "GeometryJet",
    "chart_derivatives",
    "embedding_jet",
    "radial_geometry",
    "second_fundamental_norm",
    "shape_geometry",
    "unit_normal",
]


class DegenerateGeometryError(ArithmeticError):
    """The induced metric is not positive definite at some point."""

    def __init__(self, point, t, detail: str = ""):
        self.point = np.asarray(point)
        self.t = t
        msg = f"degenerate metric at point {np.round(self.point, 6).tolist()} (t={t})"
        super().__init__(msg + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class GeometryJet:
    frame: ChartFrame
    X: Jet2  # (P, n+1)
    tangents: Jet2  # (P, n, n+1), row i = dX/dx_i
    g: Jet2
    g_inv: Jet2
    sqrt_g: Jet2
    normal: Jet2
    h: Jet2
    H: Jet2
    H_big: Jet2
    II2: Jet2

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def area_ratio(self) -> Jet2:
        """Volume density relative to the round sphere, a chart-invariant scalar."""
        return self.sqrt_g / self.frame.sqrt_det


def chart_derivatives(func, frame: ChartFrame):
    """Values, chart gradient and chart Hessian of ``func o Phi``."""
    y = frame.Phi
    f = np.asarray(func.value(y), float)
    grad = np.asarray(func.grad(y), float)
    hess = np.asarray(func.hess(y), float)
    df = np.einsum("pia,pa->pi", frame.dPhi, grad)
    ddf = np.einsum("pia,pab,pjb->pij", frame.dPhi, hess, frame.dPhi) + np.einsum(
        "pija,pa->pij", frame.ddPhi, grad
    )
    return f, df, ddf


def _cofactor_vector(cols: Jet2) -> Jet2:
    """Generalized cross product of the rows of ``cols`` (shape (..., n, n+1)).

    Component k is ``det[X_1, ..., X_n, e_k]``; for n = 2 this is X_1 x X_2.
    """
    n = cols.shape[-2]
    comps = []
    for k in range(n + 1):
        keep = [a for a in range(n + 1) if a != k]
        minor = cols[..., keep]  # (..., n, n): rows = tangent index, cols = kept coords
        d = J.det(minor)
        comps.append(d if (k + n) % 2 == 0 else -d)
    return J.stack(comps, axis=-1)


def unit_normal(jacobian_columns, reference=None):
    """Unit normal to ``n`` tangent vectors in R^{n+1}.

    ``jacobian_columns`` has shape ``(..., n, n+1)`` (row i is the i-th tangent
    vector) and may be a plain array or a :class:`Jet2`.  Without ``reference``
    the orientation is that of the generalized cross product; with it, the sign
    is chosen so that ``<N, reference> > 0``.
    """
    cols = jacobian_columns if isinstance(jacobian_columns, Jet2) else Jet2(jacobian_columns)
    c = _cofactor_vector(cols)
    norm2 = (c * c).sum(axis=-1)
    if np.any(norm2.v <= 1e-300):
        raise np.linalg.LinAlgError("rank-deficient Jacobian: tangent vectors are linearly dependent")
    N = c / norm2.sqrt().map_parts(lambda a: a[..., None])
    if reference is not None:
        sign = np.atleast_1d(np.sign(np.sum(N.v * np.asarray(reference, float), axis=-1)))
        sign[sign == 0] = 1.0
        sign = sign.reshape(N.v.shape[:-1])
        N = N * sign[..., None]
    return N if isinstance(jacobian_columns, Jet2) else N.v


def radial_geometry(frame: ChartFrame, rho: Jet2, drho: Jet2, ddrho: Jet2, t=None) -> GeometryJet:
    """Full geometry jet of ``X = rho * Phi`` from jets of rho and its chart derivatives."""
    Phi, dPhi, ddPhi = frame.Phi, frame.dPhi, frame.ddPhi
    expand = lambda a, k: a.map_parts(lambda x: x.reshape(x.shape + (1,) * k))  # noqa: E731
    X = expand(rho, 1) * Phi
    # X_i = rho_i Phi + rho Phi_i
    tangents = expand(drho, 1) * Phi[:, None, :] + expand(rho, 2) * dPhi
    # X_ij = rho_ij Phi + rho_i Phi_j + rho_j Phi_i + rho Phi_ij
    cross = expand(drho, 1).map_parts(lambda a: a[:, :, None, :]) * dPhi[:, None, :, :]
    second = (
        expand(ddrho, 1) * Phi[:, None, None, :]
        + cross
        + cross.map_parts(lambda a: np.swapaxes(a, 1, 2))
        + expand(rho, 3) * ddPhi
    )
    g = J.einsum("pia,pja->pij", tangents, tangents)
    detg = J.det(g)
    bad = ~(detg.v > 0.0)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise DegenerateGeometryError(Phi[idx], t, f"det g = {detg.v[idx]:.3e}")
    sqrt_g = detg.sqrt()
    g_inv = J.inv(g)
    N = unit_normal(tangents, reference=Phi)
    h = -J.einsum("pija,pa->pij", second, N)
    shape_op = g_inv @ h
    n = frame.n
    H = J.trace(shape_op) * (1.0 / n)
    II2 = J.trace(shape_op @ shape_op)
    return GeometryJet(frame, X, tangents, g, g_inv, sqrt_g, N, h, H, H * float(n), II2)


def shape_geometry(radius_func, frame_or_points, scale: float = 1.0) -> GeometryJet:
    """Geometry (values only) of the radial graph ``scale * radius_func`` over S^n."""
    frame = frame_or_points if isinstance(frame_or_points, ChartFrame) else frames_at_points(frame_or_points)
    r, dr, ddr = chart_derivatives(radius_func, frame)
    return radial_geometry(frame, Jet2(scale * r), Jet2(scale * dr), Jet2(scale * ddr))


def embedding_jet(variation, frame_or_points, t: float) -> GeometryJet:
    """Geometry of ``X_t = (1 + t f + phi(t)) Phi`` with exact t-derivatives to order two.

    ``phi(t)``, ``phi'(t)`` and ``phi''(t)`` come from the variation's volume
    constraint (Newton solve plus implicit differentiation); the correction
    is spatially constant, so it enters only ``rho`` itself.
    """
    frame = frame_or_points if isinstance(frame_or_points, ChartFrame) else frames_at_points(frame_or_points)
    f, df, ddf = chart_derivatives(variation.func, frame)
    phi, dphi, ddphi = variation.phi_jet(t)
    if abs(t) * float(np.max(np.abs(f))) + abs(phi) >= 0.5:
        raise DegenerateGeometryError(frame.Phi[int(np.argmax(np.abs(f)))], t, "outside the admissible band")
    rho = Jet2(1.0 + t * f + phi, f + dphi, np.full_like(f, ddphi))
    drho = Jet2(t * df, df)
    ddrho = Jet2(t * ddf, ddf)
    return radial_geometry(frame, rho, drho, ddrho, t=t)


def second_fundamental_norm(geometry: GeometryJet) -> np.ndarray:
    """|II|^2 = g^ik g^jl h_ij h_kl (value part)."""
    gi = geometry.g_inv.v
    h = geometry.h.v
    return np.einsum("pik,pjl,pij,pkl->p", gi, gi, h, h)
