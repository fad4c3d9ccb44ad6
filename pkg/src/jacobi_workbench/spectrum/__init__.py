"""Spectra of ``-Delta + V`` on perturbed spheres: triangle meshes for n = 2, meridian reduction for any n."""

from .eigen import DiscreteOperator, EigenConvergenceError, SolverBreakdownError, SpectrumResult, lowest_eigenpairs
from .mesh import TriMesh, build_mesh, discrete_mean_curvature, icosphere, mesh_from_surface, sphere_mesh
from .reports import BoundReport, HarrellLossReport, RefinedSpectrum, eigenvalue_bound_report, harrell_loss_check, refined_spectrum
from .surfaces import RadialSurface, VariedSurface, is_zonal_function
from .zonal import ZonalProblem, zonal_operator, zonal_spectrum, zonal_sturm_liouville

__all__ = [
    "BoundReport",
    "HarrellLossReport",
    "RefinedSpectrum",
    "eigenvalue_bound_report",
    "harrell_loss_check",
    "refined_spectrum",
    "DiscreteOperator",
    "EigenConvergenceError",
    "RadialSurface",
    "SolverBreakdownError",
    "SpectrumResult",
    "TriMesh",
    "VariedSurface",
    "ZonalProblem",
    "build_mesh",
    "discrete_mean_curvature",
    "icosphere",
    "is_zonal_function",
    "lowest_eigenpairs",
    "mesh_from_surface",
    "sphere_mesh",
    "zonal_operator",
    "zonal_spectrum",
    "zonal_sturm_liouville",
]
