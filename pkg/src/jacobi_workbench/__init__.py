"""Numerical workbench for volume-preserving variations of spheres.

Submodules
----------
sphere      quadrature, charts and harmonics on S^n
fields      ambient functions (harmonic polynomials, ellipsoids, expressions)
jet         second-order forward-mode arithmetic in the variation parameter
geometry    metric, normal, second fundamental form and mean curvature of radial graphs
variation   the volume-preserving family and its closed-form derivatives at the sphere
willmore    normalized Willmore functional, its variations and a random-shape scan
spectrum    lowest eigenvalues of -Delta + V on perturbed spheres
cli         batch runner
"""

__version__ = "0.1.0"

from .fields import EllipsoidRadius, ExpressionFunction, LinearCombination, Polynomial, solid_harmonic, zonal_polynomial
from .geometry import DegenerateGeometryError, GeometryJet, embedding_jet, second_fundamental_norm, unit_normal
from .jet import Jet2
from .sphere import QuadratureGrid, ScalarField, integrate, laplacian_eigenvalue, make_grid, project_onto_harmonics, spherical_harmonic, zonal_harmonic
from .variation import RadialVariation, lemma2_eval, lemma3_eval, phi_prime0, phi_second0, solve_phi
from .willmore import conjecture_scan, stability_polynomial, willmore_classical, willmore_first_variation, willmore_normalized, willmore_second_variation_spectral

__all__ = [
    "DegenerateGeometryError",
    "EllipsoidRadius",
    "ExpressionFunction",
    "GeometryJet",
    "Jet2",
    "LinearCombination",
    "Polynomial",
    "QuadratureGrid",
    "RadialVariation",
    "ScalarField",
    "conjecture_scan",
    "embedding_jet",
    "integrate",
    "laplacian_eigenvalue",
    "lemma2_eval",
    "lemma3_eval",
    "make_grid",
    "phi_prime0",
    "phi_second0",
    "project_onto_harmonics",
    "second_fundamental_norm",
    "solid_harmonic",
    "solve_phi",
    "spherical_harmonic",
    "stability_polynomial",
    "unit_normal",
    "willmore_classical",
    "willmore_first_variation",
    "willmore_normalized",
    "willmore_second_variation_spectral",
    "zonal_harmonic",
    "zonal_polynomial",
]
