import csv
import io

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from jacobi_workbench.fields import EllipsoidRadius, Polynomial, solid_harmonic, zonal_polynomial
from jacobi_workbench.spectrum import (
    DiscreteOperator,
    RadialSurface,
    VariedSurface,
    build_mesh,
    discrete_mean_curvature,
    eigenvalue_bound_report,
    harrell_loss_check,
    icosphere,
    lowest_eigenpairs,
    mesh_from_surface,
    sphere_mesh,
    zonal_operator,
    zonal_spectrum,
    zonal_sturm_liouville,
)
from jacobi_workbench.sphere import make_grid
from jacobi_workbench.variation import RadialVariation
from jacobi_workbench.willmore import area_normalizing_scale


@pytest.mark.parametrize("depth", [0, 1, 3])
def test_icosphere_is_a_closed_genus_zero_mesh(depth):
    v, f = icosphere(depth)
    assert len(v) == 10 * 4**depth + 2
    assert len(f) == 20 * 4**depth
    assert len(v) - 3 * len(f) // 2 + len(f) == 2
    assert np.allclose(np.linalg.norm(v, axis=1), 1.0)
    centroids = v[f].mean(axis=1)
    normals = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    assert np.all(np.einsum("ij,ij->i", normals, centroids) > 0)


def test_mesh_operators():
    m = sphere_mesh(4, radius=2.0)
    assert m.is_closed()
    assert m.area == pytest.approx(16 * np.pi, rel=2e-3)
    K = m.stiffness
    assert abs(K - K.T).max() < 1e-12
    assert np.allclose(K @ np.ones(K.shape[0]), 0.0, atol=1e-10)
    assert np.allclose(m.potential, -0.5)  # -(nH)^2 / n with H = 1/2


def test_laplacian_spectrum_of_the_sphere():
    m = sphere_mesh(4)
    res = lowest_eigenpairs(m.with_potential(np.zeros(len(m.mass)), "laplace"), k=9)
    lam = res.eigenvalues
    assert abs(lam[0]) < 1e-8
    assert np.allclose(lam[1:4], 2.0, atol=5e-3)
    assert np.allclose(lam[4:9], 6.0, atol=2e-2)
    assert np.all(res.residual_norms < 1e-6)


def test_against_a_library_eigensolver():
    m = sphere_mesh(3)
    ev = np.sort(eigsh(m.stiffness + sp.diags(m.mass * m.potential), k=4, M=sp.diags(m.mass), sigma=-5.0)[0])
    ours = lowest_eigenpairs(m, k=4).eigenvalues
    assert np.allclose(ours, ev, atol=1e-7)


def test_mean_and_jacobi_operators_coincide_on_the_sphere():
    a = lowest_eigenpairs(sphere_mesh(3, operator="mean"), k=1).eigenvalues[0]
    b = lowest_eigenpairs(sphere_mesh(3, operator="jacobi"), k=1).eigenvalues[0]
    assert a == pytest.approx(b, abs=1e-10)
    assert a == pytest.approx(-2.0, abs=1e-2)


def test_jacobi_operator_lies_below_mean_operator():
    surf = RadialSurface(EllipsoidRadius((1.0, 1.1, 1.4)), 2)
    mean = lowest_eigenpairs(mesh_from_surface(surf, 4, "mean"), k=1).eigenvalues[0]
    jac = lowest_eigenpairs(mesh_from_surface(surf, 4, "jacobi"), k=1).eigenvalues[0]
    assert jac <= mean


def test_discrete_mean_curvature_close_to_analytic():
    surf = RadialSurface(EllipsoidRadius((1.0, 1.2, 1.5)), 2)
    m = mesh_from_surface(surf, 5)
    gap = np.abs(discrete_mean_curvature(m) - m.info["H_big"])
    assert np.median(gap) < 1e-3


def test_ground_state_is_positive_and_csv_parses():
    res = lowest_eigenpairs(sphere_mesh(3), k=2)
    assert res.ground_state_sign_definite()
    rows = list(csv.reader(io.StringIO(res.to_csv([0.1, 0.2]))))
    assert rows[0] == ["index", "eigenvalue", "residual", "refinement_delta"]
    assert float(rows[1][1]) == res.eigenvalues[0]


def test_off_export():
    m = sphere_mesh(1)
    lines = m.to_off().splitlines()
    assert lines[0] == "OFF"
    assert lines[1] == f"{len(m.vertices)} {len(m.faces)} 0"
    assert lines[-1].startswith("3 ")


def test_generic_operator_and_bad_mass():
    op = DiscreteOperator(sp.csr_matrix(np.array([[1.0, -1.0], [-1.0, 1.0]])), np.ones(2), np.array([0.0, 1.0]))
    lam = lowest_eigenpairs(op, k=2).eigenvalues
    assert np.allclose(lam, np.sort(np.linalg.eigvalsh([[1.0, -1.0], [-1.0, 2.0]])))
    with pytest.raises(ValueError):
        lowest_eigenpairs(DiscreteOperator(op.stiffness, np.array([1.0, 0.0]), op.potential))


def test_zonal_sphere_in_higher_dimensions():
    for n in (2, 3, 4):
        surf = RadialSurface(Polynomial.constant(n + 1, 1.0), n)
        lam = zonal_spectrum(surf, 256).eigenvalues[0]
        assert lam == pytest.approx(-float(n), abs=1e-4)


def test_zonal_agrees_with_fem(y20_variation):
    surf = VariedSurface(y20_variation, 0.05)
    z = zonal_spectrum(surf, 512).eigenvalues[0]
    f = lowest_eigenpairs(mesh_from_surface(surf, 5)).eigenvalues[0]
    assert z == pytest.approx(f, abs=2e-3)


def test_zonal_reduction_refuses_non_zonal_surfaces():
    with pytest.raises(ValueError):
        zonal_operator(RadialSurface(EllipsoidRadius((1.0, 1.2, 1.5)), 2), 128)
    with pytest.raises(ValueError):
        zonal_operator(RadialSurface(Polynomial.constant(3, 1.0), 2), 16)


def test_zonal_sturm_liouville_entry_point(zonal3_variation):
    res = zonal_sturm_liouville(3, zonal3_variation, 0.05, resolution=256)
    assert res.eigenvalues[0] < -3.0
    with pytest.raises(ValueError):
        zonal_sturm_liouville(2, zonal3_variation, 0.05)


def test_build_mesh_requires_depth():
    var = RadialVariation(solid_harmonic(2, 1), make_grid(2, 16))
    with pytest.raises(ValueError):
        build_mesh(var, 0.05, 2)
    assert build_mesh(var, 0.05, 3).is_closed()


def test_mesh_needs_a_two_dimensional_surface():
    with pytest.raises(ValueError):
        mesh_from_surface(RadialSurface(zonal_polynomial(3, 0), 3), 3)


def test_bound_report_on_a_zonal_ellipsoid():
    rad = EllipsoidRadius((1.0, 1.0, 1.3))
    surf = RadialSurface(rad, 2, area_normalizing_scale(rad, make_grid(2, 64)))
    rep = eigenvalue_bound_report(surf, solver="zonal", level=256, willmore_resolution=32)
    assert rep.chain_holds and rep.strict
    assert rep.ground_state_positive
    assert '"chain_holds": true' in rep.to_json()


def test_second_eigenvalue_of_the_round_sphere_is_zero():
    rep = harrell_loss_check(RadialSurface(Polynomial.constant(3, 1.0), 2), depth=4)
    assert rep.verdict == "zero"
    assert rep.eigenvalues[0] == pytest.approx(-2.0, abs=1e-2)
