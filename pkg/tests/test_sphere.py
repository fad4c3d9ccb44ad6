import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_workbench.fields import Polynomial, solid_harmonic, sphere_volume, zonal_polynomial
from jacobi_workbench.sphere import (
    ScalarField,
    UnsupportedBasisError,
    chart_frame,
    field_from_json,
    frames_at_points,
    integrate,
    laplacian_eigenvalue,
    make_grid,
    project_onto_harmonics,
    spherical_harmonic,
    zonal_harmonic,
)


@pytest.mark.parametrize("n,res,expected", [(2, 32, 4 * math.pi), (3, 16, 2 * math.pi**2), (2, 4, 4 * math.pi), (4, 8, sphere_volume(4))])
def test_weights_sum_to_sphere_volume(n, res, expected):
    g = make_grid(n, res)
    assert abs(g.weights.sum() - expected) / expected < 1e-10
    assert np.all(g.weights > 0)
    assert np.max(np.abs(np.linalg.norm(g.unit_points, axis=1) - 1.0)) < 1e-14


def test_zonal_grid_has_same_volume():
    for n in (2, 3, 5):
        g = make_grid(n, 24, zonal=True)
        assert abs(g.volume - sphere_volume(n)) < 1e-10 * sphere_volume(n)


@pytest.mark.parametrize("n,res", [(1, 16), (2, 3)])
def test_make_grid_rejects_bad_arguments(n, res):
    with pytest.raises(ValueError):
        make_grid(n, res)


def test_integrate_examples(grid2):
    one = ScalarField(grid2, np.ones(len(grid2)))
    assert abs(integrate(one, grid2) - 4 * math.pi) < 1e-10
    x3 = ScalarField(grid2, grid2.unit_points[:, 2])
    assert abs(integrate(x3)) < 1e-12
    y = spherical_harmonic(3, -2, grid2.unit_points)
    assert abs(integrate(ScalarField(grid2, y * y)) - 1.0) < 1e-8


def test_integrate_rejects_foreign_grid(grid2):
    f = ScalarField(grid2, np.ones(len(grid2)))
    with pytest.raises(ValueError):
        integrate(f, make_grid(2, 16))


def test_scalar_field_length_checked(grid2):
    with pytest.raises(ValueError):
        ScalarField(grid2, np.ones(3))


def test_integration_converges_with_resolution():
    f = lambda p: np.exp(p[:, 0] + 0.5 * p[:, 2])  # noqa: E731
    ref = make_grid(2, 64)
    exact = ref.integrate(f(ref.unit_points))
    errs = [abs(make_grid(2, r).integrate(f(make_grid(2, r).unit_points)) - exact) for r in (4, 8)]
    assert errs[1] < errs[0] / 4


def test_laplacian_eigenvalues():
    assert laplacian_eigenvalue(5, 1) == 5
    assert laplacian_eigenvalue(2, 2) == 6
    assert laplacian_eigenvalue(3, 2) == 8
    with pytest.raises(ValueError):
        laplacian_eigenvalue(1, 2)


def test_spherical_harmonic_examples():
    assert spherical_harmonic(0, 0, np.array([0.3, 0.4, math.sqrt(0.75)])) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert spherical_harmonic(1, 0, np.array([0.0, 0.0, 1.0])) == pytest.approx(math.sqrt(3 / (4 * math.pi)))
    with pytest.raises(ValueError):
        spherical_harmonic(1, 2, np.array([0.0, 0.0, 1.0]))


def test_spherical_harmonic_chart_laplacian(rng):
    """Central differences of Y_21 in chart coordinates reproduce -6 Y."""
    th, ph = 1.1, 0.7
    h = 1e-3

    def Y(a, b):
        return spherical_harmonic(2, 1, np.array([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)]))

    d_th = (Y(th + h, ph) - Y(th - h, ph)) / (2 * h)
    d2_th = (Y(th + h, ph) - 2 * Y(th, ph) + Y(th - h, ph)) / h**2
    d2_ph = (Y(th, ph + h) - 2 * Y(th, ph) + Y(th, ph - h)) / h**2
    lap = d2_th + np.cos(th) / np.sin(th) * d_th + d2_ph / np.sin(th) ** 2
    assert lap == pytest.approx(-6.0 * Y(th, ph), rel=1e-5)


def test_spherical_harmonics_orthonormal(grid2):
    idx = [(l, m) for l in range(5) for m in range(-l, l + 1)]
    B = np.stack([spherical_harmonic(l, m, grid2.unit_points) for l, m in idx], axis=1)
    gram = B.T @ (B * grid2.weights[:, None])
    assert np.max(np.abs(gram - np.eye(len(idx)))) < 1e-8


def test_polynomial_harmonics_match_recurrence(grid2):
    for l in range(5):
        for m in range(-l, l + 1):
            assert np.allclose(solid_harmonic(l, m).value(grid2.unit_points), spherical_harmonic(l, m, grid2.unit_points), atol=1e-12)


def test_zonal_harmonic_examples(grid3_zonal):
    th = np.linspace(0, math.pi, 7)
    assert np.allclose(zonal_harmonic(3, 0, th), 1 / math.sqrt(sphere_volume(3)))
    assert zonal_harmonic(3, 1, 0.0) == pytest.approx(-zonal_harmonic(3, 1, math.pi))
    z1 = zonal_harmonic(3, 1, grid3_zonal.polar)
    z2 = zonal_harmonic(3, 2, grid3_zonal.polar)
    assert abs(grid3_zonal.integrate(z1 * z2)) < 1e-10
    assert grid3_zonal.integrate(z2 * z2) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        zonal_harmonic(3, 1, -0.1)


@pytest.mark.parametrize("n,k", [(3, 2), (4, 3), (2, 4)])
def test_zonal_harmonic_solves_eigen_ode(n, k):
    th = np.linspace(0.3, 2.8, 9)
    h = 1e-4
    z = lambda t: zonal_harmonic(n, k, t)  # noqa: E731
    d1 = (z(th + h) - z(th - h)) / (2 * h)
    d2 = (z(th + h) - 2 * z(th) + z(th - h)) / h**2
    lap = d2 + (n - 1) * np.cos(th) / np.sin(th) * d1
    assert np.allclose(lap, -laplacian_eigenvalue(n, k) * z(th), rtol=1e-5, atol=1e-6)


def test_zonal_polynomial_matches_zonal_harmonic(grid3_zonal):
    for k in range(5):
        assert np.allclose(zonal_polynomial(3, k).value(grid3_zonal.unit_points), zonal_harmonic(3, k, grid3_zonal.polar), atol=1e-12)


def test_projection_examples(grid2):
    f = ScalarField.from_function(grid2, solid_harmonic(2, 1) * 3.0)
    p = project_onto_harmonics(f, 6)
    for idx, a, _ in p.coeffs:
        assert a == pytest.approx(3.0 if idx == (2, 1) else 0.0, abs=1e-8)
    const = project_onto_harmonics(ScalarField(grid2, np.full(len(grid2), 2.5)))
    assert const.coefficient((0, 0)) == pytest.approx(2.5 * math.sqrt(4 * math.pi), abs=1e-10)


def test_projection_round_trip(grid2, rng):
    idx = [(l, m) for l in range(5) for m in range(-l, l + 1)]
    coeffs = rng.standard_normal(len(idx))
    vals = sum(c * spherical_harmonic(l, m, grid2.unit_points) for c, (l, m) in zip(coeffs, idx))
    p = project_onto_harmonics(ScalarField(grid2, vals), 4)
    assert p.residual <= 1e-8
    assert np.allclose(p.synthesize(), vals, atol=1e-10)


def test_projection_refuses_non_zonal_in_higher_dimension():
    g = make_grid(3, 8)
    f = ScalarField.from_function(g, Polynomial.coordinate(4, 0))
    with pytest.raises(UnsupportedBasisError):
        project_onto_harmonics(f)
    z = ScalarField.from_function(g, zonal_polynomial(3, 2))
    p = project_onto_harmonics(z, 4)
    assert p.coefficient((2,)) == pytest.approx(1.0, abs=1e-10)


def test_field_json_round_trip():
    g = make_grid(2, 6)
    f = ScalarField(g, np.arange(len(g), dtype=float))
    back = field_from_json(f.to_json())
    assert np.array_equal(back.values, f.values)
    assert np.array_equal(back.grid.weights, g.weights)
    assert back.grid.dim == 2


def test_chart_frame_derivatives_match_differences():
    a = np.array([[0.7, 1.2, 2.0]])
    h = 1e-5
    fr = chart_frame(a)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        d = (chart_frame(a + e).Phi - chart_frame(a - e).Phi) / (2 * h)
        assert np.allclose(d, fr.dPhi[:, i], atol=1e-9)
        dd = (chart_frame(a + e).dPhi - chart_frame(a - e).dPhi) / (2 * h)
        assert np.allclose(dd, fr.ddPhi[:, i], atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_rotated_frames_are_regular(v):
    p = np.asarray(v) / np.linalg.norm(v)
    fr = frames_at_points(p[None, :])
    assert np.allclose(fr.Phi[0], p, atol=1e-14)
    assert np.allclose(fr.metric[0], np.eye(2), atol=1e-12)
