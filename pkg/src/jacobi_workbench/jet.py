"""Second-order forward-mode arithmetic in a single scalar parameter.

A :class:`Jet2` carries a value together with its first and second derivative
with respect to one parameter (``t`` throughout this package).  The three parts
are numpy arrays of identical shape, so a jet can hold a whole batch of
points, vectors or matrices at once.  Constants (floats or arrays) mix freely
with jets.
"""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np


class Jet2:
    """Truncated Taylor triple ``(f, f', f'')`` of an array-valued quantity."""

    __slots__ = ("v", "d1", "d2")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, v, d1=None, d2=None):
        v = np.asarray(v, dtype=float)
        self.v = v
        self.d1 = np.zeros_like(v) if d1 is None else np.broadcast_to(np.asarray(d1, float), v.shape).copy()
        self.d2 = np.zeros_like(v) if d2 is None else np.broadcast_to(np.asarray(d2, float), v.shape).copy()

    @classmethod
    def constant(cls, v) -> "Jet2":
        return cls(v)

    @classmethod
    def variable(cls, v) -> "Jet2":
        """Independent parameter itself: derivative one, curvature zero."""
        v = np.asarray(v, dtype=float)
        return cls(v, np.ones_like(v), np.zeros_like(v))

    # -- container protocol ------------------------------------------------
    @property
    def shape(self):
        return self.v.shape

    @property
    def ndim(self):
        return self.v.ndim

    def __getitem__(self, idx) -> "Jet2":
        return Jet2(self.v[idx], self.d1[idx], self.d2[idx])

    def __repr__(self) -> str:
        return f"Jet2(v={self.v!r}, d1={self.d1!r}, d2={self.d2!r})"

    def part(self, order: int) -> np.ndarray:
        return (self.v, self.d1, self.d2)[order]

    def map_parts(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Jet2":
        """Apply a linear map to all three parts (reshape, transpose, sum, ...)."""
        return Jet2(fn(self.v), fn(self.d1), fn(self.d2))

    # -- arithmetic ----------------------------------------------------------
    def __neg__(self) -> "Jet2":
        return Jet2(-self.v, -self.d1, -self.d2)

    def __add__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return Jet2(self.v + other.v, self.d1 + other.d1, self.d2 + other.d2)
        other = np.asarray(other, float)
        v = self.v + other
        return Jet2(v, np.broadcast_to(self.d1, v.shape), np.broadcast_to(self.d2, v.shape))

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        return self + (-other)

    def __rsub__(self, other) -> "Jet2":
        return (-self) + other

    def __mul__(self, other) -> "Jet2":
        return bilinear(np.multiply, self, other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, float))

    def __rtruediv__(self, other) -> "Jet2":
        return self.reciprocal() * other

    def __pow__(self, p) -> "Jet2":
        p = float(p)
        if p == 2.0:
            return self * self
        return self.compose(
            lambda x: x**p,
            lambda x: p * x ** (p - 1.0),
            lambda x: p * (p - 1.0) * x ** (p - 2.0),
        )

    def compose(self, f0, f1, f2) -> "Jet2":
        """Chain rule for an elementwise function with derivatives ``f1``, ``f2``."""
        g1 = f1(self.v)
        return Jet2(f0(self.v), g1 * self.d1, f2(self.v) * self.d1**2 + g1 * self.d2)

    def reciprocal(self) -> "Jet2":
        return self.compose(lambda x: 1.0 / x, lambda x: -1.0 / x**2, lambda x: 2.0 / x**3)

    def sqrt(self) -> "Jet2":
        return self.compose(np.sqrt, lambda x: 0.5 / np.sqrt(x), lambda x: -0.25 / (x * np.sqrt(x)))

    def sum(self, axis=None) -> "Jet2":
        return self.map_parts(lambda a: np.sum(a, axis=axis))

    def __matmul__(self, other) -> "Jet2":
        return bilinear(np.matmul, self, other)

    def __rmatmul__(self, other) -> "Jet2":
        return bilinear(np.matmul, other, self)


def bilinear(op, a, b) -> Jet2:
    """Leibniz rule for any bilinear ``op`` (product, matmul, einsum, ...)."""
    a_jet = isinstance(a, Jet2)
    b_jet = isinstance(b, Jet2)
    if a_jet and b_jet:
        return Jet2(
            op(a.v, b.v),
            op(a.d1, b.v) + op(a.v, b.d1),
            op(a.d2, b.v) + 2.0 * op(a.d1, b.d1) + op(a.v, b.d2),
        )
    if a_jet:
        b = np.asarray(b, float)
        return Jet2(op(a.v, b), op(a.d1, b), op(a.d2, b))
    if b_jet:
        a = np.asarray(a, float)
        return Jet2(op(a, b.v), op(a, b.d1), op(a, b.d2))
    return Jet2(op(a, b))


def einsum(spec: str, a, b) -> Jet2:
    return bilinear(lambda x, y: np.einsum(spec, x, y), a, b)


def stack(jets, axis=-1) -> Jet2:
    return Jet2(
        np.stack([j.v for j in jets], axis=axis),
        np.stack([j.d1 for j in jets], axis=axis),
        np.stack([j.d2 for j in jets], axis=axis),
    )


def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def det(m: Jet2) -> Jet2:
    """Determinant over the last two axes by the Leibniz expansion.

    Intended for the small matrices met here (n <= 4); it does not need the
    matrix to be invertible, unlike the trace formula.
    """
    n = m.shape[-1]
    total = None
    for perm in itertools.permutations(range(n)):
        term = m[..., 0, perm[0]]
        for row in range(1, n):
            term = term * m[..., row, perm[row]]
        term = term if _perm_sign(perm) > 0 else -term
        total = term if total is None else total + term
    return total


def inv(m: Jet2) -> Jet2:
    """Matrix inverse over the last two axes."""
    a = np.linalg.inv(m.v)
    d1 = -a @ m.d1 @ a
    d2 = 2.0 * a @ m.d1 @ a @ m.d1 @ a - a @ m.d2 @ a
    return Jet2(a, d1, d2)


def trace(m: Jet2) -> Jet2:
    return m.map_parts(lambda x: np.trace(x, axis1=-2, axis2=-1))
