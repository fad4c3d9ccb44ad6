"""
lambda_1 <= -W <= -2 on ellipsoids
==================================

For any closed surface of area 4 pi the ground state of -Delta - H^2/2 is
bounded by minus the Willmore energy, which in turn is at most -2.  We check
both links on a few ellipsoids, each rescaled to area 4 pi, and compare the
mean-curvature operator with the Jacobi operator -Delta - |II|^2.
"""

from jacobi_workbench.fields import EllipsoidRadius
from jacobi_workbench.spectrum import RadialSurface, eigenvalue_bound_report, lowest_eigenpairs, mesh_from_surface
from jacobi_workbench.sphere import make_grid
from jacobi_workbench.willmore import area_normalizing_scale

grid = make_grid(2, 64)
print(f"{'axes':>18} {'lambda_1':>10} {'-W':>10} {'slack':>10}  jacobi lambda_1")
for axes in [(1.0, 1.0, 1.3), (1.0, 1.2, 1.5), (1.0, 1.0, 2.0)]:
    rad = EllipsoidRadius(axes)
    surface = RadialSurface(rad, 2, area_normalizing_scale(rad, grid))
    rep = eigenvalue_bound_report(surface, "fem", 4, willmore_resolution=48)
    jac = lowest_eigenpairs(mesh_from_surface(surface, 5, "jacobi")).eigenvalues[0]
    print(f"{str(axes):>18} {rep.lambda1:10.5f} {-rep.willmore:10.5f} {rep.slack:10.5f}  {jac:.5f}")

# |II|^2 >= H^2/n pointwise, so the Jacobi ground state always sits lower.
