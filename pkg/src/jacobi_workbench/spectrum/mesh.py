"""Icosphere meshes of radial surfaces with cotangent stiffness and lumped mass."""

from __future__ import annotations

import functools
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..fields import Polynomial
from ..sphere import frames_at_points
from .surfaces import RadialSurface, VariedSurface, potential_values

__all__ = [
    "TriMesh",
    "build_mesh",
    "cotangent_stiffness",
    "discrete_mean_curvature",
    "icosphere",
    "lumped_mass",
    "mesh_from_surface",
    "sphere_mesh",
]


@functools.lru_cache(maxsize=8)
def icosphere(depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions and outward-oriented faces of a subdivided icosahedron.

    Each level splits every triangle into four through edge midpoints, which
    are pushed back onto the sphere.  Returns read-only arrays.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    p = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, p, 0), (1, p, 0), (-1, -p, 0), (1, -p, 0),
        (0, -1, p), (0, 1, p), (0, -1, -p), (0, 1, -p),
        (p, 0, -1), (p, 0, 1), (-p, 0, -1), (-p, 0, 1),
    ]  # fmt: skip
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]  # fmt: skip
    V = [np.array(v, float) / np.linalg.norm(v) for v in verts]
    F = faces
    for _ in range(depth):
        midpoint: dict[tuple[int, int], int] = {}

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoint:
                m = V[a] + V[b]
                V.append(m / np.linalg.norm(m))
                midpoint[key] = len(V) - 1
            return midpoint[key]

        nxt = []
        for a, b, c in F:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nxt += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        F = nxt
    dirs = np.array(V)
    tri = np.array(F, dtype=np.int64)
    # orient every face outward
    e1 = dirs[tri[:, 1]] - dirs[tri[:, 0]]
    e2 = dirs[tri[:, 2]] - dirs[tri[:, 0]]
    flip = np.einsum("ij,ij->i", np.cross(e1, e2), dirs[tri].sum(axis=1)) < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    dirs.setflags(write=False)
    tri.setflags(write=False)
    return dirs, tri


def cotangent_stiffness(vertices: np.ndarray, faces: np.ndarray) -> sp.csr_matrix:
    """Discrete ``-Delta``: ``K_ij = -(cot a_ij + cot b_ij) / 2`` off the diagonal, zero row sums."""
    nv = len(vertices)
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j, o = faces[:, (k + 1) % 3], faces[:, (k + 2) % 3], faces[:, k]
        u = vertices[i] - vertices[o]
        v = vertices[j] - vertices[o]
        cot = np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
        w = -0.5 * cot
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    off = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nv, nv)
    ).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sp.diags(diag)).tocsr()


def lumped_mass(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Barycentric lumping: each vertex receives a third of every incident triangle's area."""
    e1 = vertices[faces[:, 1]] - vertices[faces[:, 0]]
    e2 = vertices[faces[:, 2]] - vertices[faces[:, 0]]
    area = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
    return np.bincount(faces.ravel(), weights=np.repeat(area / 3.0, 3), minlength=len(vertices))


@dataclass
class TriMesh:
    """Triangulated radial surface with the discrete operator ``K + M diag(V)``.

    Attributes
    ----------
    vertices : (N, 3) array
        Surface points ``r(v) v`` over the icosphere directions ``v``.
    faces : (F, 3) int array
        Outward-oriented triangles.
    stiffness : sparse (N, N)
        Cotangent discretization of ``-Delta``.
    mass : (N,) array
        Lumped vertex areas.
    potential : (N,) array
        Analytic potential sampled at the vertex directions.
    """

    vertices: np.ndarray
    faces: np.ndarray
    directions: np.ndarray
    stiffness: sp.csr_matrix
    mass: np.ndarray
    potential: np.ndarray
    operator: str = "mean"
    depth: int = 0
    info: dict = field(default_factory=dict)

    @property
    def area(self) -> float:
        return float(np.sum(self.mass))

    @property
    def discretization(self) -> dict:
        return {"kind": "fem", "depth": self.depth, "vertices": len(self.vertices), "operator": self.operator}

    def with_potential(self, potential, operator: str) -> "TriMesh":
        return TriMesh(
            self.vertices, self.faces, self.directions, self.stiffness, self.mass,
            np.asarray(potential, float), operator, self.depth, dict(self.info),
        )  # fmt: skip

    def edge_counts(self) -> np.ndarray:
        """Number of faces sharing each undirected edge."""
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        e.sort(axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return counts

    def is_closed(self) -> bool:
        return bool(np.all(self.edge_counts() == 2))

    def to_off(self) -> str:
        buf = io.StringIO()
        buf.write("OFF\n")
        buf.write(f"{len(self.vertices)} {len(self.faces)} 0\n")
        for v in self.vertices:
            buf.write(" ".join(repr(float(x)) for x in v) + "\n")
        for f in self.faces:
            buf.write("3 " + " ".join(str(int(i)) for i in f) + "\n")
        return buf.getvalue()


def mesh_from_surface(surface, depth: int, operator: str = "mean") -> TriMesh:
    """Mesh a radial surface in R^3 over the depth-``depth`` icosphere."""
    if surface.n != 2:
        raise ValueError("triangle meshes represent surfaces in R^3 (n = 2)")
    dirs, faces = icosphere(depth)
    r = surface.radius(dirs)
    if np.any(r <= 0.0):
        bad = int(np.argmin(r))
        raise ValueError(f"non-positive radius {r[bad]:.3e} at direction {dirs[bad].round(6).tolist()}")
    verts = r[:, None] * dirs
    geom = surface.geometry(frames_at_points(dirs))
    pot = potential_values(geom, operator)
    info = {"surface": surface.describe(), "H_big": geom.H_big.v, "II2": geom.II2.v}
    return TriMesh(verts, np.array(faces), np.array(dirs), cotangent_stiffness(verts, faces), lumped_mass(verts, faces), pot, operator, depth, info)


def build_mesh(variation, t: float, depth: int, operator: str = "mean") -> TriMesh:
    """Mesh ``X_t`` of a volume-preserving variation; ``depth >= 3``."""
    if depth < 3:
        raise ValueError("depth must be at least 3")
    return mesh_from_surface(VariedSurface(variation, t), depth, operator)


def discrete_mean_curvature(mesh: TriMesh) -> np.ndarray:
    """Signed ``nH`` from the cotangent mean-curvature normal ``K X / M``.

    Since ``-Delta X = nH N``, the norm of the discrete vector gives ``|nH|``
    and its sign follows the outward vertex direction.
    """
    hn = np.asarray(mesh.stiffness @ mesh.vertices) / mesh.mass[:, None]
    sign = np.sign(np.einsum("ij,ij->i", hn, mesh.directions))
    return sign * np.linalg.norm(hn, axis=1)


def sphere_mesh(depth: int, radius: float = 1.0, operator: str = "mean") -> TriMesh:
    """Convenience: the round sphere of the given radius."""
    return mesh_from_surface(RadialSurface(Polynomial.constant(3, 1.0), 2, radius, "sphere"), depth, operator)
