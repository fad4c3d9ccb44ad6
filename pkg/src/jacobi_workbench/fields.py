"""Functions on the sphere represented through an ambient extension.

Every function used as a perturbation direction or radial profile is given as
a smooth function ``F`` on (an open set of) R^{n+1}; the function on the
sphere is its restriction.  Chart derivatives of ``F o Phi`` then follow from
the chain rule with the ambient gradient and Hessian, which is exact and
independent of the chart.  Homogeneous harmonic polynomials give the
spherical harmonics, Gegenbauer polynomials in the axis coordinate give the
zonal harmonics.

All objects implement ``value(y)``, ``grad(y)`` and ``hess(y)`` for points
``y`` of shape ``(..., n + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class Polynomial:
    """Multivariate polynomial stored as ``{exponent tuple: coefficient}``."""

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        self.terms: dict[tuple, float] = {}
        for exps, c in (terms or {}).items():
            if len(exps) != nvars:
                raise ValueError("exponent tuple length does not match nvars")
            if c != 0.0:
                self.terms[tuple(int(e) for e in exps)] = self.terms.get(tuple(exps), 0.0) + float(c)

    # -- constructors ------------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c: float) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def coordinate(cls, nvars: int, i: int, c: float = 1.0) -> "Polynomial":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): c})

    @classmethod
    def linear(cls, coefficients) -> "Polynomial":
        coefficients = list(coefficients)
        p = cls(len(coefficients))
        for i, c in enumerate(coefficients):
            p = p + cls.coordinate(len(coefficients), i, c)
        return p

    # -- algebra -------------------------------------------------------------
    def __add__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, float(other))
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(self.nvars, {e: c for e, c in out.items() if c != 0.0})

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial(self.nvars, {e: c * float(other) for e, c in self.terms.items()})
        out: dict[tuple, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.constant(self.nvars, 1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def derivative(self, i: int) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return Polynomial(self.nvars, out)

    # -- evaluation ----------------------------------------------------------
    @cached_property
    def _compiled(self):
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=int), np.zeros(0)
        exps = np.array(list(self.terms.keys()), dtype=int)
        coef = np.array(list(self.terms.values()), dtype=float)
        return exps, coef

    @cached_property
    def _grad_polys(self):
        return [self.derivative(i) for i in range(self.nvars)]

    @cached_property
    def _hess_polys(self):
        g = self._grad_polys
        return [[g[i].derivative(j) for j in range(self.nvars)] for i in range(self.nvars)]

    def value(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        exps, coef = self._compiled
        if coef.size == 0:
            return np.zeros(y.shape[:-1])
        deg = int(exps.max())
        powers = y[..., None, :] ** np.arange(deg + 1)[:, None]  # (..., deg+1, nvars)
        mono = np.ones(y.shape[:-1] + (len(coef),))
        for i in range(self.nvars):
            mono = mono * powers[..., exps[:, i], i]
        return mono @ coef

    __call__ = value

    def grad(self, y) -> np.ndarray:
        return np.stack([p.value(y) for p in self._grad_polys], axis=-1)

    def hess(self, y) -> np.ndarray:
        return np.stack([np.stack([p.value(y) for p in row], axis=-1) for row in self._hess_polys], axis=-2)

    def __repr__(self) -> str:
        return f"Polynomial(nvars={self.nvars}, degree={self.degree}, nterms={len(self.terms)})"


# ---------------------------------------------------------------------------
# harmonic polynomials
# ---------------------------------------------------------------------------


def _legendre_derivative_coeffs(l: int, m: int) -> np.ndarray:
    """Monomial coefficients (ascending) of d^m P_l / dx^m."""
    c = np.polynomial.legendre.leg2poly(np.eye(l + 1)[l])
    for _ in range(m):
        c = np.polynomial.polynomial.polyder(c)
    return np.atleast_1d(c)


def solid_harmonic(l: int, m: int) -> Polynomial:
    """Real orthonormal degree-``l`` spherical harmonic as a harmonic polynomial in (x, y, z).

    Orders ``m > 0`` carry ``cos(m phi)``, ``m < 0`` carry ``sin(|m| phi)``;
    no Condon-Shortley phase.
    """
    if abs(m) > l:
        raise ValueError(f"|m|={abs(m)} exceeds degree l={l}")
    am = abs(m)
    x, y, z = (Polynomial.coordinate(3, i) for i in range(3))
    r2 = x * x + y * y + z * z
    # d^m P_l(cos theta) * r^(l-m)  ->  sum_j c_j z^j r^(l-m-j)
    q = Polynomial(3)
    for j, cj in enumerate(_legendre_derivative_coeffs(l, am)):
        if cj == 0.0 or (l - am - j) % 2:
            continue
        q = q + (z**j) * (r2 ** ((l - am - j) // 2)) * cj
    # (x + i y)^m split into real / imaginary parts
    re = Polynomial(3)
    im = Polynomial(3)
    for k in range(am + 1):
        term = (x ** (am - k)) * (y**k) * math.comb(am, k)
        if k % 4 == 0:
            re = re + term
        elif k % 4 == 1:
            im = im + term
        elif k % 4 == 2:
            re = re - term
        else:
            im = im - term
    norm = math.sqrt((2 * l + 1) / (4.0 * math.pi) * math.factorial(l - am) / math.factorial(l + am))
    if m == 0:
        return q * norm
    return q * (re if m > 0 else im) * (norm * math.sqrt(2.0))


def sphere_volume(n: int) -> float:
    """n-dimensional volume of the unit sphere S^n in R^{n+1}."""
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def gegenbauer_coeffs(k: int, alpha: float) -> np.ndarray:
    """Ascending monomial coefficients of C_k^alpha by the three-term recurrence."""
    c_prev = np.array([1.0])
    if k == 0:
        return c_prev
    c = np.array([0.0, 2.0 * alpha])
    for j in range(2, k + 1):
        nxt = np.zeros(j + 1)
        nxt[1:] += 2.0 * (j + alpha - 1.0) * c
        nxt[: len(c_prev)] -= (j + 2.0 * alpha - 2.0) * c_prev
        c_prev, c = c, nxt / j
    return c


def zonal_normalization(n: int, k: int) -> float:
    """Factor making c * C_k^{(n-1)/2}(cos theta) unit-norm in L^2(S^n)."""
    alpha = (n - 1) / 2.0
    h = (
        math.pi
        * 2.0 ** (1.0 - 2.0 * alpha)
        * math.gamma(k + 2.0 * alpha)
        / (math.factorial(k) * (k + alpha) * math.gamma(alpha) ** 2)
    )
    return 1.0 / math.sqrt(sphere_volume(n - 1) * h)


def zonal_polynomial(n: int, k: int) -> Polynomial:
    """Unit-norm degree-``k`` zonal harmonic on S^n in the last (axis) coordinate."""
    c = gegenbauer_coeffs(k, (n - 1) / 2.0) * zonal_normalization(n, k)
    axis = Polynomial.coordinate(n + 1, n)
    p = Polynomial(n + 1)
    for j, cj in enumerate(c):
        if cj != 0.0:
            p = p + (axis**j) * cj
    return p


# ---------------------------------------------------------------------------
# non-polynomial ambient functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EllipsoidRadius:
    """Radial profile rho(y) = (sum y_i^2 / a_i^2)^(-1/2) of an axis-aligned ellipsoid."""

    axes: tuple

    @property
    def nvars(self) -> int:
        return len(self.axes)

    @cached_property
    def _inv2(self):
        return 1.0 / np.asarray(self.axes, float) ** 2

    def value(self, y):
        q = np.sum(np.asarray(y) ** 2 * self._inv2, axis=-1)
        return q**-0.5

    __call__ = value

    def grad(self, y):
        y = np.asarray(y, float)
        q = np.sum(y**2 * self._inv2, axis=-1)
        return -(q**-1.5)[..., None] * y * self._inv2

    def hess(self, y):
        y = np.asarray(y, float)
        q = np.sum(y**2 * self._inv2, axis=-1)
        ay = y * self._inv2
        out = 3.0 * (q**-2.5)[..., None, None] * ay[..., :, None] * ay[..., None, :]
        out -= (q**-1.5)[..., None, None] * np.diag(self._inv2)
        return out


@dataclass
class ExpressionFunction:
    """Function given by a sympy-parsable expression in ``x0, ..., xn``."""

    expression: str
    nvars: int
    _fns: tuple = field(init=False, repr=False)

    def __post_init__(self):
        import sympy

        syms = sympy.symbols(f"x0:{self.nvars}")
        expr = sympy.sympify(self.expression, locals={str(s): s for s in syms})
        unknown = expr.free_symbols - set(syms)
        if unknown:
            raise ValueError(f"unknown symbols in expression: {sorted(map(str, unknown))}")
        grad = [sympy.diff(expr, s) for s in syms]
        hess = [[sympy.diff(g, s) for s in syms] for g in grad]
        lam = lambda e: sympy.lambdify(syms, e, "numpy")  # noqa: E731
        self._fns = (lam(expr), [lam(g) for g in grad], [[lam(h) for h in row] for row in hess])

    def _call(self, fn, y):
        y = np.asarray(y, float)
        return np.broadcast_to(np.asarray(fn(*np.moveaxis(y, -1, 0)), float), y.shape[:-1])

    def value(self, y):
        return self._call(self._fns[0], y)

    __call__ = value

    def grad(self, y):
        return np.stack([self._call(g, y) for g in self._fns[1]], axis=-1)

    def hess(self, y):
        return np.stack([np.stack([self._call(h, y) for h in row], axis=-1) for row in self._fns[2]], axis=-2)


@dataclass(frozen=True)
class FiniteDifferenceFunction:
    """Wraps a plain callable; gradient and Hessian by 4th-order central differences."""

    fn: object
    nvars: int
    step: float = 1e-3

    def value(self, y):
        return np.asarray(self.fn(np.asarray(y, float)), float)

    __call__ = value

    def grad(self, y):
        y = np.asarray(y, float)
        h = self.step
        out = []
        for i in range(self.nvars):
            e = np.zeros(self.nvars)
            e[i] = h
            out.append((-self.fn(y + 2 * e) + 8 * self.fn(y + e) - 8 * self.fn(y - e) + self.fn(y - 2 * e)) / (12 * h))
        return np.stack(out, axis=-1)

    def hess(self, y):
        y = np.asarray(y, float)
        h = self.step
        d = self.nvars
        out = np.empty(y.shape[:-1] + (d, d))
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = 1.0
            for j in range(i, d):
                ej = np.zeros(d)
                ej[j] = 1.0
                # 4th-order mixed stencil from nested 5-point first differences
                acc = 0.0
                for a, wa in ((2, -1), (1, 8), (-1, -8), (-2, 1)):
                    for b, wb in ((2, -1), (1, 8), (-1, -8), (-2, 1)):
                        acc = acc + wa * wb * self.fn(y + h * (a * ei + b * ej))
                out[..., i, j] = out[..., j, i] = acc / (144 * h * h)
        return out


@dataclass(frozen=True)
class LinearCombination:
    """``offset + sum_k c_k F_k`` of ambient functions."""

    terms: tuple  # ((coefficient, function), ...)
    offset: float = 0.0

    @property
    def nvars(self) -> int:
        return self.terms[0][1].nvars

    def value(self, y):
        return self.offset + sum(c * f.value(y) for c, f in self.terms)

    __call__ = value

    def grad(self, y):
        return sum(c * f.grad(y) for c, f in self.terms)

    def hess(self, y):
        return sum(c * f.hess(y) for c, f in self.terms)


@dataclass(frozen=True)
class TranslatedSphereRadius:
    """Radial profile of the unit sphere centred at ``beta``.

    On S^n: ``rho = <y, beta> + sqrt(<y, beta>^2 - |beta|^2 + 1)``, which
    solves ``|rho y - beta| = 1``; requires ``|beta| < 1``.
    """

    beta: tuple

    @property
    def nvars(self) -> int:
        return len(self.beta)

    @cached_property
    def _b(self):
        return np.asarray(self.beta, float)

    def _parts(self, y):
        y = np.asarray(y, float)
        p = y @ self._b
        q = p * p - self._b @ self._b + 1.0
        return y, p, np.sqrt(q)

    def value(self, y):
        _, p, s = self._parts(y)
        return p + s

    __call__ = value

    def grad(self, y):
        _, p, s = self._parts(y)
        return ((1.0 + p / s)[..., None]) * self._b

    def hess(self, y):
        _, p, s = self._parts(y)
        coef = (1.0 / s - p * p / s**3)[..., None, None]
        return coef * np.outer(self._b, self._b)
