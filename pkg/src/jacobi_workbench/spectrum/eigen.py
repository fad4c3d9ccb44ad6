"""Lowest eigenpairs of ``(K + M diag(V)) u = lambda M u`` by shifted block inverse iteration.

The pencil is symmetric with a diagonal positive mass, so the operator
``(A - sigma M)^{-1} M`` is self-adjoint in the ``M`` inner product.  With the
shift below the spectrum its
dominant eigenvectors are the lowest ones of the pencil.  Each sweep applies
one sparse LU solve to a block, deflates already locked vectors and performs
a Rayleigh-Ritz step.  Start vectors come from a fixed seed, so the output is
deterministic.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "DiscreteOperator",
    "EigenConvergenceError",
    "SolverBreakdownError",
    "SpectrumResult",
    "assemble",
    "gershgorin_lower_bound",
    "lowest_eigenpairs",
    "spectral_lower_bound",
]


class EigenConvergenceError(RuntimeError):
    pass


class SolverBreakdownError(ArithmeticError):
    pass


@dataclass
class DiscreteOperator:
    """Generic carrier ``(stiffness, mass, potential)`` for the solver."""

    stiffness: sp.spmatrix
    mass: np.ndarray
    potential: np.ndarray
    discretization: dict = field(default_factory=dict)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    solver_iterations: int
    discretization: dict
    shift: float = 0.0

    def ground_state_sign_definite(self, tol: float = 1e-8) -> bool:
        u = self.eigenvectors[:, 0]
        return bool(np.min(u) >= -tol * np.max(np.abs(u)))

    def to_csv(self, refinement_delta=None) -> str:
        """RFC-4180 table: index, eigenvalue, residual, refinement_delta."""
        deltas = [None] * len(self.eigenvalues) if refinement_delta is None else list(refinement_delta)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["index", "eigenvalue", "residual", "refinement_delta"])
        for i, (lam, r, d) in enumerate(zip(self.eigenvalues, self.residual_norms, deltas), start=1):
            w.writerow([i, repr(float(lam)), repr(float(r)), "" if d is None else repr(float(d))])
        return buf.getvalue()


def assemble(problem) -> tuple[sp.csr_matrix, np.ndarray]:
    """``A = K + M diag(V)`` and the mass vector."""
    m = np.asarray(problem.mass, float)
    if np.any(m <= 0.0):
        raise ValueError("mass entries must be positive")
    A = sp.csr_matrix(problem.stiffness) + sp.diags(m * np.asarray(problem.potential, float))
    return A.tocsr(), m


def gershgorin_lower_bound(A: sp.spmatrix, mass: np.ndarray) -> float:
    """Lower bound for the spectrum of ``M^{-1/2} A M^{-1/2}``."""
    s = 1.0 / np.sqrt(mass)
    B = sp.diags(s) @ sp.csr_matrix(A) @ sp.diags(s)
    d = B.diagonal()
    radius = np.asarray(abs(B).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - radius))


def spectral_lower_bound(problem, A: sp.spmatrix, mass: np.ndarray) -> float:
    """The larger of two lower bounds for the pencil.

    Both stiffness discretizations used here are positive semidefinite (P1
    finite elements and positive-weight fluxes), so ``min V`` bounds the
    spectrum from below.  The Gershgorin bound holds for any symmetric
    ``A`` but is very pessimistic when the mass varies strongly.
    """
    return max(gershgorin_lower_bound(A, mass), float(np.min(problem.potential)))


def _m_orthonormalize(Y: np.ndarray, sqrt_m: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(sqrt_m[:, None] * Y)
    keep = np.abs(np.diag(r)) > 1e-13 * max(1.0, np.max(np.abs(np.diag(r))))
    return q[:, keep] / sqrt_m[:, None]


def _fix_sign(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    s = float(np.dot(m, x))
    if abs(s) < 1e-10 * np.sqrt(np.dot(m, x * x) * np.sum(m)):
        s = x[int(np.argmax(np.abs(x)))]
    return x if s >= 0 else -x


def lowest_eigenpairs(
    problem,
    k: int = 1,
    tol: float = 1e-9,
    max_iter: int = 2000,
    block: int | None = None,
    seed: int = 0,
    shift: float | None = None,
) -> SpectrumResult:
    """The ``k`` smallest eigenpairs of the pencil described by ``problem``.

    Parameters
    ----------
    problem
        Anything with ``stiffness``, ``mass`` and ``potential`` (a
        :class:`~.mesh.TriMesh`, a zonal problem or a :class:`DiscreteOperator`).
    k
        Number of eigenpairs.
    tol
        Target for ``||(A - lambda M) u|| / ||M u||`` of each pair.
    block
        Working block size, ``k + max(4, k)`` by default.
    shift
        Defaults to :func:`spectral_lower_bound` minus one half.

    Returns
    -------
    SpectrumResult
        Ascending eigenvalues with ``M``-orthonormal eigenvectors.  Each
        vector's sign makes its ``M``-weighted sum non-negative.
    """
    A, m = assemble(problem)
    N = A.shape[0]
    k = int(k)
    if not 1 <= k <= N:
        raise ValueError(f"k must be in [1, {N}]")
    p = min(N, block if block is not None else k + max(4, k))
    sigma = spectral_lower_bound(problem, A, m) - 0.5 if shift is None else float(shift)
    try:
        lu = spla.splu((A - sp.diags(sigma * m)).tocsc())
    except RuntimeError as exc:  # singular factor
        raise SolverBreakdownError(f"shifted matrix is singular at sigma={sigma}: {exc}") from exc
    sqrt_m = np.sqrt(m)

    rng = np.random.default_rng(seed)
    X = _m_orthonormalize(rng.standard_normal((N, p)), sqrt_m)
    locked_vecs = np.zeros((N, 0))
    locked_vals: list[float] = []
    for it in range(1, max_iter + 1):
        Y = lu.solve(m[:, None] * X)
        if not np.all(np.isfinite(Y)):
            raise SolverBreakdownError("non-finite values in the inner solve")
        if locked_vecs.shape[1]:
            Y -= locked_vecs @ (locked_vecs.T @ (m[:, None] * Y))
        Q = _m_orthonormalize(Y, sqrt_m)
        AQ = A @ Q
        small = Q.T @ AQ
        vals, vecs = sla.eigh(0.5 * (small + small.T))
        X = Q @ vecs
        R = AQ @ vecs - (m[:, None] * X) * vals
        res = np.linalg.norm(R, axis=0) / np.linalg.norm(m[:, None] * X, axis=0)
        need = k - len(locked_vals)
        nconv = 0
        while nconv < min(need, len(vals)) and res[nconv] <= tol:
            nconv += 1
        if nconv:
            locked_vecs = np.hstack([locked_vecs, X[:, :nconv]])
            locked_vals += [float(v) for v in vals[:nconv]]
            X = X[:, nconv:]
        if len(locked_vals) >= k:
            break
    else:
        raise EigenConvergenceError(
            f"{len(locked_vals)} of {k} eigenpairs converged in {max_iter} sweeps "
            f"(worst active residual {float(np.max(res[: max(1, need)])):.2e})"
        )
    order = np.argsort(locked_vals, kind="stable")
    vecs = np.column_stack([_fix_sign(locked_vecs[:, i], m) for i in order])
    # final residuals against the assembled pencil
    lam = np.asarray(locked_vals)[order]
    R = A @ vecs - (m[:, None] * vecs) * lam
    res = np.linalg.norm(R, axis=0) / np.linalg.norm(m[:, None] * vecs, axis=0)
    disc = dict(getattr(problem, "discretization", {}) or {})
    return SpectrumResult(lam, vecs, res, it, disc, sigma)
