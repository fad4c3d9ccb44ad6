import numpy as np
import pytest

from jacobi_workbench.fields import EllipsoidRadius, Polynomial, solid_harmonic
from jacobi_workbench.geometry import (
    DegenerateGeometryError,
    embedding_jet,
    radial_geometry,
    second_fundamental_norm,
    shape_geometry,
    unit_normal,
)
from jacobi_workbench.jet import Jet2
from jacobi_workbench.sphere import chart_frame, frames_at_points, make_grid
from jacobi_workbench.variation import RadialVariation


@pytest.mark.parametrize("n,r", [(2, 1.0), (2, 3.0), (3, 0.5), (4, 2.0)])
def test_round_sphere_invariants(n, r):
    g = make_grid(n, 6)
    geom = shape_geometry(Polynomial.constant(n + 1, 1.0), g.frame, scale=r)
    assert np.allclose(geom.H.v, 1.0 / r)
    assert np.allclose(geom.H_big.v, n / r)
    assert np.allclose(geom.II2.v, n / r**2)
    assert np.allclose(second_fundamental_norm(geom), n / r**2)
    assert np.allclose(geom.normal.v, g.unit_points, atol=1e-12)
    assert np.allclose(geom.area_ratio.v, r**n)


def test_unit_normal_examples():
    cols = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert np.allclose(unit_normal(cols), [0.0, 0.0, 1.0])
    assert np.allclose(unit_normal(cols, reference=[0, 0, -2]), [0.0, 0.0, -1.0])
    cols4 = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 2.0, 0]])
    assert np.allclose(np.abs(unit_normal(cols4)), [0, 0, 0, 1.0])


def test_unit_normal_rejects_rank_deficient_input():
    with pytest.raises(np.linalg.LinAlgError):
        unit_normal(np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]]))


def test_degenerate_metric_raises():
    frame = frames_at_points(np.array([[0.0, 0.0, 1.0]]))
    zero = Jet2(np.zeros(1))
    with pytest.raises(DegenerateGeometryError) as info:
        radial_geometry(frame, zero, Jet2(np.zeros((1, 2))), Jet2(np.zeros((1, 2, 2))), t=0.3)
    assert info.value.t == 0.3


def test_invariants_do_not_depend_on_the_chart():
    """Scalar curvature quantities agree between the polar chart and a rotated one."""
    rad = EllipsoidRadius((1.0, 1.3, 0.8))
    polar = chart_frame(np.array([[0.9, 0.4], [2.0, 5.0], [1.3, 2.2]]))
    rotated = frames_at_points(polar.Phi)
    a, b = shape_geometry(rad, polar), shape_geometry(rad, rotated)
    for name in ("H", "II2"):
        assert np.allclose(getattr(a, name).v, getattr(b, name).v, rtol=1e-10)
    assert np.allclose(a.X.v, b.X.v)
    assert np.allclose(a.area_ratio.v, b.area_ratio.v)


def test_ellipsoid_normal_is_gradient_direction():
    axes = np.array([1.0, 1.2, 1.5])
    geom = shape_geometry(EllipsoidRadius(tuple(axes)), make_grid(2, 8).frame)
    grad = geom.X.v / axes**2
    grad /= np.linalg.norm(grad, axis=1, keepdims=True)
    assert np.allclose(geom.normal.v, grad, atol=1e-12)


def test_sqrt_g_derivative_matches_differences():
    grid = make_grid(2, 8)
    var = RadialVariation(solid_harmonic(2, 1) + Polynomial.coordinate(3, 0, 0.3), grid)
    frame = frames_at_points(grid.unit_points[::7])
    h = 1e-4
    t0 = 0.05
    jet = embedding_jet(var, frame, t0)
    fd = (embedding_jet(var, frame, t0 + h).sqrt_g.v - embedding_jet(var, frame, t0 - h).sqrt_g.v) / (2 * h)
    assert np.allclose(jet.sqrt_g.d1, fd, rtol=1e-6, atol=1e-9)
    fd_h = (embedding_jet(var, frame, t0 + h).H.v - embedding_jet(var, frame, t0 - h).H.v) / (2 * h)
    assert np.allclose(jet.H.d1, fd_h, rtol=1e-6, atol=1e-8)


def test_embedding_outside_band_raises(y20_variation):
    with pytest.raises((DegenerateGeometryError, ValueError)):
        embedding_jet(y20_variation, y20_variation.grid.frame, 5.0)
