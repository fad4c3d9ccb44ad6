"""Eigenvalue bounds against the Willmore functional, and second-eigenvalue checks."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .eigen import SpectrumResult, lowest_eigenpairs
from .mesh import mesh_from_surface
from .zonal import zonal_spectrum

__all__ = [
    "BoundReport",
    "HarrellLossReport",
    "RefinedSpectrum",
    "eigenvalue_bound_report",
    "harrell_loss_check",
    "refined_spectrum",
]


@dataclass
class RefinedSpectrum:
    """Eigenvalues at the finer of two discretizations with the change as error bar."""

    eigenvalues: np.ndarray
    deltas: np.ndarray
    coarse: SpectrumResult
    fine: SpectrumResult

    @property
    def errors(self) -> np.ndarray:
        return self.deltas

    def to_csv(self) -> str:
        return self.fine.to_csv(self.deltas)


def _solve(surface, solver: str, level: int, k: int, operator: str, tol: float) -> SpectrumResult:
    if solver == "fem":
        return lowest_eigenpairs(mesh_from_surface(surface, level, operator), k, tol=tol)
    if solver == "zonal":
        return zonal_spectrum(surface, level, k, operator, tol=tol)
    raise ValueError(f"unknown solver {solver!r}; use 'fem' or 'zonal'")


def refined_spectrum(
    surface, solver: str = "fem", level: int | None = None, k: int = 1, operator: str = "mean", tol: float = 1e-9
) -> RefinedSpectrum:
    """Solve at ``level`` and at the next refinement (depth + 1, or doubled resolution)."""
    if level is None:
        level = 5 if solver == "fem" else 512
    finer = level + 1 if solver == "fem" else 2 * level
    coarse = _solve(surface, solver, level, k, operator, tol)
    fine = _solve(surface, solver, finer, k, operator, tol)
    return RefinedSpectrum(fine.eigenvalues, np.abs(fine.eigenvalues - coarse.eigenvalues), coarse, fine)


@dataclass
class BoundReport:
    """``lambda_1 <= -W <= -n`` with the measured slack of each link."""

    surface: dict
    n: int
    lambda1: float
    lambda1_error: float
    willmore: float
    willmore_error: float
    slack: float
    tolerance: float
    lambda_le_minus_w: bool
    minus_w_le_minus_n: bool
    strict_lambda: bool
    strict_willmore: bool
    ground_state_positive: bool
    discretization: dict

    @property
    def chain_holds(self) -> bool:
        return self.lambda_le_minus_w and self.minus_w_le_minus_n

    @property
    def strict(self) -> bool:
        return self.chain_holds and self.strict_lambda and self.strict_willmore

    def to_dict(self) -> dict:
        d = asdict(self)
        d["chain_holds"] = self.chain_holds
        d["strict"] = self.strict
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def eigenvalue_bound_report(
    surface,
    solver: str = "fem",
    level: int | None = None,
    operator: str = "mean",
    tol: float = 1e-3,
    willmore_resolution: int | None = None,
) -> BoundReport:
    """Compare ``lambda_1`` with ``-W`` and ``-n`` on one surface.

    A link ``a <= b`` holds when ``a <= b + tol``; it is strict when
    ``a + 2 err < b`` with ``err`` the combined refinement error bars.
    """
    spec = refined_spectrum(surface, solver, level, 1, operator)
    lam, lam_err = float(spec.eigenvalues[0]), float(spec.deltas[0])
    if willmore_resolution is None:
        w, w_err = surface.willmore()
    else:
        w, w_err = surface.willmore(willmore_resolution)
    n = surface.n
    err = lam_err + w_err
    return BoundReport(
        surface=surface.describe(),
        n=n,
        lambda1=lam,
        lambda1_error=lam_err,
        willmore=w,
        willmore_error=w_err,
        slack=lam + w,
        tolerance=tol,
        lambda_le_minus_w=lam <= -w + tol,
        minus_w_le_minus_n=-w <= -n + tol,
        strict_lambda=lam + 2.0 * err < -w,
        strict_willmore=w - 2.0 * w_err > n,
        ground_state_positive=spec.fine.ground_state_sign_definite(),
        discretization=spec.fine.discretization,
    )


@dataclass
class HarrellLossReport:
    """Second eigenvalue of ``-Delta - H_big^2 / n`` on a closed surface.

    ``verdict`` is ``"zero"`` when the three eigenvalues after the ground
    state all lie within ``zero_tol`` of 0 (the round-sphere picture),
    ``"negative"`` when ``lambda_2`` is below zero by more than twice its
    refinement error, and ``"inconclusive"`` otherwise.
    """

    surface: dict
    eigenvalues: list
    errors: list
    zero_tol: float
    zero_triple: bool
    strictly_negative: bool
    discretization: dict

    @property
    def verdict(self) -> str:
        if self.zero_triple:
            return "zero"
        return "negative" if self.strictly_negative else "inconclusive"

    @property
    def lambda2(self) -> float:
        return self.eigenvalues[1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def harrell_loss_check(surface, depth: int = 5, zero_tol: float = 2e-2) -> HarrellLossReport:
    """Classify ``lambda_2`` on a surface in R^3 from a depth / depth + 1 pair of meshes."""
    if surface.n != 2:
        raise ValueError("the second-eigenvalue check is implemented for surfaces in R^3")
    spec = refined_spectrum(surface, "fem", depth, 4, "mean")
    lam = [float(x) for x in spec.eigenvalues]
    err = [float(x) for x in spec.deltas]
    zero = all(abs(x) <= zero_tol for x in lam[1:4])
    negative = lam[1] + 2.0 * err[1] < 0.0
    return HarrellLossReport(surface.describe(), lam, err, zero_tol, zero, negative, spec.fine.discretization)
