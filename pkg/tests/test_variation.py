import math

import numpy as np
import pytest

from jacobi_workbench.fields import Polynomial, solid_harmonic, zonal_polynomial
from jacobi_workbench.sphere import make_grid
from jacobi_workbench.variation import (
    QUANTITIES,
    RadialVariation,
    lemma2_eval,
    lemma3_eval,
    phi_diagnostics,
    phi_prime0,
    phi_second0,
    solve_phi,
    volume_conservation,
)
from jacobi_workbench.willmore import translation_family_willmore


def test_constant_direction_is_undone_exactly(grid2):
    var = RadialVariation(Polynomial.constant(3, 0.7), grid2)
    for t in (-0.1, 0.03, 0.1):
        assert solve_phi(var, t) == pytest.approx(-0.7 * t, abs=1e-14)
    assert phi_prime0(var) == pytest.approx(-0.7)
    assert phi_second0(var) == pytest.approx(0.0, abs=1e-14)


def test_phi_at_zero_and_volume(y20_variation):
    assert solve_phi(y20_variation, 0.0) == 0.0
    assert y20_variation.residual(0.05) <= 1e-12


def test_phi_derivatives_for_y20(y20_variation):
    # int |grad Y20|^2 = 6 and int Y20^2 = 1, so phi''(0) = -(6 + 2) / (2 * 4 pi)
    assert phi_prime0(y20_variation) == pytest.approx(0.0, abs=1e-14)
    assert phi_second0(y20_variation) == pytest.approx(-1.0 / math.pi, rel=1e-10)
    d = phi_diagnostics(y20_variation)
    assert d["err_phi_prime0"] < 1e-8
    assert d["err_phi_second0"] < 1e-6


def test_over_n_variant_disagrees_when_mean_is_nonzero(grid2):
    var = RadialVariation(solid_harmonic(2, 0) + Polynomial.constant(3, 0.4), grid2)
    d = phi_diagnostics(var)
    assert d["err_phi_prime0"] < 1e-8
    assert not d["over_n_variant_consistent"]
    assert abs(d["mean_zero_identity"]) < 1e-12


def test_volume_is_conserved(zonal3_variation):
    report = volume_conservation(zonal3_variation, 21)
    assert len(report["t"]) == 21
    assert report["max_relative_error"] <= 1e-12


def test_t_max_is_enforced(y20_variation):
    with pytest.raises(ValueError):
        solve_phi(y20_variation, 2 * y20_variation.t_max)


def test_zonal_grid_rejects_non_zonal_direction(grid3_zonal):
    with pytest.raises(ValueError):
        RadialVariation(Polynomial.coordinate(4, 1), grid3_zonal)


@pytest.mark.parametrize("order", [1, 2])
def test_closed_forms_match_jets_and_differences(y20_variation, order):
    pts = y20_variation.grid.unit_points[::40]
    ev = (lemma2_eval if order == 1 else lemma3_eval)(y20_variation, pts, with_fd=True)
    rows = ev.table()
    assert [r["quantity"] for r in rows] == list(QUANTITIES)
    assert rows[0]["item"] == f"{order}.1"
    for r in rows:
        assert r["max_rel_err"] < 1e-10, r
        assert r["fd_rel_err"] < 1e-7, r


def test_closed_forms_in_higher_dimension(zonal3_variation):
    pts = zonal3_variation.grid.unit_points[::9]
    for ev in (lemma2_eval(zonal3_variation, pts), lemma3_eval(zonal3_variation, pts)):
        assert ev.worst()[1] < 1e-10


def test_sign_fault_is_detected(y20_variation):
    pts = y20_variation.grid.unit_points[::50]
    ev = lemma3_eval(y20_variation, pts, sign_fault="sqrt_g")
    name, err = ev.worst()
    assert name == "sqrt_g" and err > 1e-3


def test_integrated_first_variation_of_mean_curvature_vanishes(grid2):
    """With volume fixed, the integrated first variation of nH sqrt(g) is zero on the round sphere."""
    var = RadialVariation(solid_harmonic(3, 1) + Polynomial.constant(3, 0.2), grid2)
    ev = lemma2_eval(var, grid2.frame)
    h2 = ev.entries["H2"].jet
    assert abs(grid2.integrate(h2)) < 1e-10


def test_exact_translation_family_is_round():
    grid = make_grid(2, 16)
    w, resid = translation_family_willmore((0.0, 0.0, 1.0), 0.2, grid)
    assert w == pytest.approx(2.0, abs=1e-12)
    assert resid < 1e-12


def test_degree_one_direction_is_only_approximately_a_translation(grid2):
    var = RadialVariation(Polynomial.linear([0.0, 0.0, 1.0]), grid2)
    from jacobi_workbench.variation import translation_residual

    r = translation_residual(var, 0.05)
    assert 1e-6 < r < 1e-2
    assert np.isfinite(r)


def test_zonal_polynomial_variation_uses_zonal_grid(grid3_zonal):
    var = RadialVariation(zonal_polynomial(3, 3), grid3_zonal)
    assert var.n == 3
    assert var.residual(var.t_max) <= 1e-12
