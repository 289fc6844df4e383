"""Uniform triangular meshes of rectangles with edge connectivity.

Each grid square is split into two triangles along the diagonal running
from the cell's bottom-right corner to its top-left corner.  All triangles
are counterclockwise.  Edges are stored once, in canonical order (lower
vertex index first), so that edge-midpoint degrees of freedom (as used by
nonconforming elements) are numbered deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Domain", "Mesh", "AffineMap", "build_uniform_mesh", "affine_map"]


@dataclass(frozen=True)
class Domain:
    """Axis-aligned rectangle [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(
                f"domain must have positive extent, got "
                f"[{self.xmin}, {self.xmax}] x [{self.ymin}, {self.ymax}]"
            )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def extent(self) -> float:
        return max(self.width, self.height)


class Mesh:
    """Uniform triangulation of a rectangle with full edge connectivity.

    Attributes
    ----------
    vertices : (V, 2) float array
        Vertex coordinates.
    triangles : (T, 3) int array
        Vertex indices per triangle, counterclockwise.
    edges : (E, 2) int array
        Unique edges, canonical order (lower vertex index first).
    tri_edges : (T, 3) int array
        tri_edges[t, i] is the global index of the edge opposite local
        vertex i of triangle t.
    edge_tris : (E, 2) int array
        Adjacent triangle indices per edge; second entry is -1 for
        boundary edges.
    boundary_edge : (E,) bool array
        True where the edge has exactly one adjacent triangle.
    h : float
        Grid cell width (triangle legs have length h).
    """

    def __init__(self, domain: Domain, n: int, vertices, triangles):
        self.domain = domain
        self.n = n
        self.h = domain.width / n
        self.vertices = vertices
        self.triangles = triangles
        self._build_edges()
        self._midpoints = None
        self._areas = None

    def _build_edges(self):
        tris = self.triangles
        edge_ids: dict[tuple[int, int], int] = {}
        edges = []
        tri_edges = np.empty((len(tris), 3), dtype=np.int64)
        for t, (v0, v1, v2) in enumerate(tris):
            # local edge i is opposite local vertex i
            for i, (va, vb) in enumerate(((v1, v2), (v2, v0), (v0, v1))):
                key = (va, vb) if va < vb else (vb, va)
                e = edge_ids.get(key)
                if e is None:
                    e = len(edges)
                    edge_ids[key] = e
                    edges.append(key)
                tri_edges[t, i] = e
        self.edges = np.array(edges, dtype=np.int64)
        self.tri_edges = tri_edges

        edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
        for t in range(len(tris)):
            for e in tri_edges[t]:
                if edge_tris[e, 0] == -1:
                    edge_tris[e, 0] = t
                else:
                    edge_tris[e, 1] = t
        self.edge_tris = edge_tris
        self.boundary_edge = edge_tris[:, 1] == -1

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_midpoints(self):
        """(E, 2) midpoints of all edges."""
        if self._midpoints is None:
            v = self.vertices
            self._midpoints = 0.5 * (v[self.edges[:, 0]] + v[self.edges[:, 1]])
        return self._midpoints

    @property
    def areas(self):
        """(T,) signed triangle areas (positive for ccw triangles)."""
        if self._areas is None:
            p = self.vertices[self.triangles]
            d1 = p[:, 1] - p[:, 0]
            d2 = p[:, 2] - p[:, 0]
            self._areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        return self._areas

    def tri_vertices(self, t: int):
        """(3, 2) vertex coordinates of triangle t."""
        return self.vertices[self.triangles[t]]

    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    def locate(self, x: float, y: float) -> int:
        """Triangle index containing point (x, y); boundary ties resolved
        toward lower indices.  Points outside the domain raise ValueError.
        """
        d = self.domain
        tol = 1e-12 * d.extent
        if not (d.xmin - tol <= x <= d.xmax + tol and d.ymin - tol <= y <= d.ymax + tol):
            raise ValueError(f"point ({x}, {y}) outside domain")
        i = min(int((x - d.xmin) / self.h), self.n - 1)
        j = min(int((y - d.ymin) / self.h), self.n - 1)
        xi = (x - d.xmin) / self.h - i
        eta = (y - d.ymin) / self.h - j
        cell = 2 * (j * self.n + i)
        return cell if xi + eta <= 1.0 else cell + 1

    def outward_normal(self, t: int, e: int):
        """Unit outward normal of triangle t on its edge e."""
        va, vb = self.vertices[self.edges[e]]
        d = vb - va
        n = np.array([d[1], -d[0]])
        n /= np.hypot(n[0], n[1])
        mid = 0.5 * (va + vb)
        cen = self.vertices[self.triangles[t]].mean(axis=0)
        if np.dot(n, mid - cen) < 0:
            n = -n
        return n

    def export_text(self) -> str:
        """Plain-text dump: header "V E T", vertices, edges, triangles.

        Debugging aid only; the format is not a stability contract.
        """
        lines = [f"{self.num_vertices} {self.num_edges} {self.num_triangles}"]
        for x, y in self.vertices:
            lines.append(f"{x!r} {y!r}")
        for a, b in self.edges:
            lines.append(f"{a} {b}")
        for v0, v1, v2 in self.triangles:
            lines.append(f"{v0} {v1} {v2}")
        return "\n".join(lines) + "\n"


def build_uniform_mesh(domain: Domain, n: int) -> Mesh:
    """Triangulate `domain` with an n x n grid of squares, each split along
    the bottom-right to top-left diagonal.

    Parameters
    ----------
    domain : Domain
    n : int
        Cells per axis, >= 1.

    Returns
    -------
    Mesh
        2*n^2 triangles, (n+1)^2 vertices, 3*n^2 + 2*n edges.
    """
    if n < 1:
        raise ValueError(f"need at least one cell per axis, got n={n}")
    xs = np.linspace(domain.xmin, domain.xmax, n + 1)
    ys = np.linspace(domain.ymin, domain.ymax, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    k = 0
    for j in range(n):
        row = j * (n + 1)
        for i in range(n):
            v00 = row + i
            v10 = v00 + 1
            v01 = v00 + (n + 1)
            v11 = v01 + 1
            tris[k] = (v00, v10, v01)      # lower-left triangle
            tris[k + 1] = (v10, v11, v01)  # upper-right triangle
            k += 2
    return Mesh(domain, n, vertices, tris)


REFERENCE_VERTICES = np.array([[0.0, 1.0], [0.0, 0.0], [1.0, 0.0]])


@dataclass
class AffineMap:
    """Affine map x = M xhat + shift from the reference triangle with
    vertices (0,1), (0,0), (1,0) onto a physical triangle."""

    matrix: np.ndarray   # (2, 2)
    shift: np.ndarray    # (2,)

    def __post_init__(self):
        self.det = float(np.linalg.det(self.matrix))
        self.inv_matrix = np.linalg.inv(self.matrix)

    def to_physical(self, xhat):
        return self.matrix @ np.asarray(xhat, dtype=float) + self.shift

    def to_reference(self, x):
        return self.inv_matrix @ (np.asarray(x, dtype=float) - self.shift)

    @classmethod
    def from_vertices(cls, p1, p2, p3) -> "AffineMap":
        """Map sending reference (0,1) -> p1, (0,0) -> p2, (1,0) -> p3."""
        p1 = np.asarray(p1, dtype=float)
        p2 = np.asarray(p2, dtype=float)
        p3 = np.asarray(p3, dtype=float)
        M = np.column_stack([p3 - p2, p1 - p2])
        return cls(M, p2)


def affine_map(mesh: Mesh, t: int) -> AffineMap:
    """Affine map from the reference triangle onto triangle t, with the
    stored vertices taken in order as images of (0,1), (0,0), (1,0)."""
    p1, p2, p3 = mesh.tri_vertices(t)
    return AffineMap.from_vertices(p1, p2, p3)
