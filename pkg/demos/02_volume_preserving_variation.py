"""
Volume-preserving perturbations of the sphere
=============================================

We deform S^2 radially, X_t = (1 + t f + phi(t)) x, and choose the constant
phi(t) so that the area stays 4 pi.  The normalized Willmore energy

    W(t) = 1/(n vol S^n) * integral of (nH)^2

equals n at the sphere and grows quadratically away from it.  The growth
rate W''(0) decomposes over spherical harmonics, each degree contributing a
fixed multiple of its squared coefficient.
"""

import math

from jacobi_workbench.fields import Polynomial, solid_harmonic
from jacobi_workbench.sphere import make_grid
from jacobi_workbench.variation import RadialVariation, phi_diagnostics
from jacobi_workbench.willmore import (
    willmore_curve,
    willmore_second_variation_spectral,
)

grid = make_grid(2, 32)

# A degree-2 mode plus a constant: the constant is absorbed by phi.
f = solid_harmonic(2, 0) + Polynomial.constant(3, 0.3)
var = RadialVariation(f, grid)

d = phi_diagnostics(var)
print(f"phi'(0)  closed {d['phi_prime0']: .10f}   finite difference {d['fd_phi_prime0']: .10f}")
print(f"phi''(0) closed {d['phi_second0']: .10f}   finite difference {d['fd_phi_second0']: .10f}")

curve = willmore_curve(var, [-0.08, -0.04, 0.0, 0.04, 0.08])
for t, w in zip(curve.t_grid, curve.values):
    print(f"  t = {t:+.2f}   W = {w:.10f}")

print(f"W'(0)  by differences: {curve.first_variation_fd:.2e}")
print(f"W''(0) by differences: {curve.second_variation_fd:.10f}")
print(f"W''(0) from modes:     {curve.spectral_second_variation:.10f}")
print(f"unit Y20 mode alone:   {willmore_second_variation_spectral(RadialVariation(solid_harmonic(2, 0), grid)):.10f}"
      f"   (6/pi = {6 / math.pi:.10f})")
