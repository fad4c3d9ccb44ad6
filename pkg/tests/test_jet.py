import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_workbench import jet as J
from jacobi_workbench.jet import Jet2

finite = st.floats(-3.0, 3.0, allow_nan=False)


def _jet(a, b, c):
    return Jet2(a, b, c)


def _fd(fn, t, h=1e-4):
    d1 = (fn(t + h) - fn(t - h)) / (2 * h)
    d2 = (fn(t + h) - 2 * fn(t) + fn(t - h)) / h**2
    return d1, d2


@settings(max_examples=60, deadline=None)
@given(finite, finite, finite, finite, finite, finite)
def test_product_rule(a, b, c, d, e, f):
    x, y = _jet(a, b, c), _jet(d, e, f)
    p = x * y
    assert p.v == pytest.approx(a * d)
    assert p.d1 == pytest.approx(b * d + a * e)
    assert p.d2 == pytest.approx(c * d + 2 * b * e + a * f, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 3.0), finite, finite)
def test_chain_rule_for_sqrt_and_reciprocal(a, b, c):
    x = _jet(a, b, c)
    s = x.sqrt()
    assert s.d1 == pytest.approx(b / (2 * np.sqrt(a)))
    assert s.d2 == pytest.approx(c / (2 * np.sqrt(a)) - b * b / (4 * a**1.5), abs=1e-12)
    r = x.reciprocal()
    assert r.d1 == pytest.approx(-b / a**2)
    assert r.d2 == pytest.approx(-c / a**2 + 2 * b * b / a**3, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 2.0), st.integers(-3, 4))
def test_power_matches_differences(t0, p):
    x = Jet2.variable(t0) * Jet2.variable(t0) + 1.0
    y = x**p
    d1, d2 = _fd(lambda t: (t * t + 1.0) ** p, t0)
    assert y.d1 == pytest.approx(d1, rel=1e-6, abs=1e-8)
    assert y.d2 == pytest.approx(d2, rel=1e-4, abs=1e-5)


def test_constants_mix_with_jets():
    x = Jet2.variable(2.0)
    y = 3.0 - x / 4.0 + np.array(1.0)
    assert isinstance(y, Jet2)
    assert y.v == pytest.approx(3.5)
    assert y.d1 == pytest.approx(-0.25)
    z = 1.0 / x
    assert z.d2 == pytest.approx(2.0 / 8.0)


def test_matrix_det_and_inverse_against_differences(rng):
    A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    B = rng.standard_normal((3, 3))
    C = rng.standard_normal((3, 3))
    m = lambda t: A + t * B + t * t * C  # noqa: E731
    jm = Jet2(A, B, 2 * C)
    d1, d2 = _fd(lambda t: np.linalg.det(m(t)), 0.0)
    dj = J.det(jm)
    assert dj.d1 == pytest.approx(d1, rel=1e-6)
    assert dj.d2 == pytest.approx(d2, rel=1e-4)
    ij = J.inv(jm)
    d1, d2 = _fd(lambda t: np.linalg.inv(m(t)), 0.0)
    assert np.allclose(ij.d1, d1, atol=1e-6)
    assert np.allclose(ij.d2, d2, atol=1e-4)
    assert np.allclose(ij.v @ A, np.eye(3))


def test_matmul_trace_einsum_stack():
    a = Jet2(np.eye(2), np.ones((2, 2)))
    b = Jet2(2 * np.eye(2))
    assert np.allclose((a @ b).d1, 2 * np.ones((2, 2)))
    assert J.trace(a).d1 == pytest.approx(2.0)
    e = J.einsum("ij,ij->", a, b)
    assert e.v == pytest.approx(4.0)
    s = J.stack([Jet2.variable(1.0), Jet2(2.0)], axis=-1)
    assert s.shape == (2,)
    assert np.allclose(s.d1, [1.0, 0.0])
    assert a[0, 1].d1 == 1.0
