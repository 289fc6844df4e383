"""Nonconforming P1 (edge-midpoint) and piecewise-constant elements,
quadrature on triangles / segments / cut polygons, and assembly of the
Laplace, velocity-stiffness and divergence operators.

The scalar nonconforming basis on a triangle is phi_i = 1 - 2 lambda_i,
where lambda_i is the barycentric coordinate of local vertex i and local
edge i is the edge opposite that vertex; phi_i equals 1 at the midpoint
of edge i and 0 at the other two midpoints.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import build_from_triplets
from .mesh import Mesh

__all__ = [
    "CRSpace",
    "P0Space",
    "QuadRule",
    "DegeneratePolygonWarning",
    "triangle_rule",
    "segment_rule",
    "integrate_polygon",
    "integrate_segment",
    "polygon_quadrature",
    "assemble_cr_laplace",
    "assemble_velocity_stiffness",
    "assemble_divergence",
]


class DegeneratePolygonWarning(UserWarning):
    """Polygon passed for integration has (numerically) zero area."""


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadRule:
    """Barycentric points and weights on a triangle; weights sum to 1 and
    the rule is exact for polynomials up to `degree` (integral = area *
    weighted sum of point values)."""

    points: np.ndarray   # (nq, 3) barycentric coordinates
    weights: np.ndarray  # (nq,)
    degree: int


_TRI_RULES = {
    1: QuadRule(np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0]), 1),
    2: QuadRule(
        np.array([
            [2 / 3, 1 / 6, 1 / 6],
            [1 / 6, 2 / 3, 1 / 6],
            [1 / 6, 1 / 6, 2 / 3],
        ]),
        np.full(3, 1 / 3),
        2,
    ),
}


def _dunavant4() -> QuadRule:
    a1, w1 = 0.445948490915965, 0.223381589678011
    a2, w2 = 0.091576213509771, 0.109951743655322
    pts, wts = [], []
    for a, w in ((a1, w1), (a2, w2)):
        for perm in ((1 - 2 * a, a, a), (a, 1 - 2 * a, a), (a, a, 1 - 2 * a)):
            pts.append(perm)
            wts.append(w)
    return QuadRule(np.array(pts), np.array(wts), 4)


_TRI_RULES[4] = _dunavant4()


def triangle_rule(degree: int) -> QuadRule:
    """Smallest stored rule exact at least to `degree` (supported: <= 4)."""
    for d in sorted(_TRI_RULES):
        if d >= degree:
            return _TRI_RULES[d]
    raise ValueError(f"no triangle rule of degree {degree} (max 4)")


def segment_rule(degree: int):
    """Gauss-Legendre nodes/weights on [0, 1] exact to `degree`."""
    npts = max(1, (degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def integrate_segment(p1, p2, f, degree: int = 2) -> float:
    """Integral of f over the segment p1--p2 by Gauss quadrature."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    ts, ws = segment_rule(degree)
    pts = p1[None, :] + ts[:, None] * (p2 - p1)[None, :]
    length = float(np.hypot(*(p2 - p1)))
    vals = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
    return length * float(ws @ vals)


def polygon_quadrature(poly, degree: int):
    """Points and weights integrating over a simple ccw polygon.

    The polygon is fan-triangulated from its centroid and a triangle rule
    of the requested exactness is applied on each piece.  Returns
    ((nq, 2) points, (nq,) weights); weights sum to the polygon area.
    """
    poly = np.asarray(poly, dtype=float)
    rule = triangle_rule(degree)
    centroid = poly.mean(axis=0)
    pts, wts = [], []
    k = len(poly)
    for i in range(k):
        tri = np.array([centroid, poly[i], poly[(i + 1) % k]])
        d1 = tri[1] - tri[0]
        d2 = tri[2] - tri[0]
        area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
        if area == 0.0:
            continue
        pts.append(rule.points @ tri)
        wts.append(rule.weights * area)
    if not pts:
        return np.zeros((0, 2)), np.zeros(0)
    return np.vstack(pts), np.concatenate(wts)


def integrate_polygon(poly, f, degree: int = 2) -> float:
    """Integral of f over a simple polygon (>= 3 vertices).

    Degenerate polygons (area below 1e-14 times the squared diameter)
    integrate to 0 and emit a DegeneratePolygonWarning.
    """
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    diam2 = max(np.ptp(x) ** 2 + np.ptp(y) ** 2, 1.0)
    if abs(area) < 1e-14 * diam2:
        warnings.warn("degenerate polygon, returning 0", DegeneratePolygonWarning)
        return 0.0
    pts, wts = polygon_quadrature(poly, degree)
    vals = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
    return float(wts @ vals)


# ---------------------------------------------------------------------------
# spaces


class CRSpace:
    """Scalar nonconforming P1 space: one degree of freedom per edge,
    the value at the edge midpoint."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.ndof = mesh.num_edges
        self.dirichlet = np.flatnonzero(mesh.boundary_edge)
        self.interior = np.flatnonzero(~mesh.boundary_edge)
        self._grads = None

    def p1_gradients(self):
        """(T, 3, 2) gradients of the barycentric coordinates lambda_i."""
        if self._grads is None:
            p = self.mesh.vertices[self.mesh.triangles]  # (T, 3, 2)
            grads = np.empty_like(p)
            areas = self.mesh.areas
            for i in range(3):
                e = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
                grads[:, i, 0] = -e[:, 1]
                grads[:, i, 1] = e[:, 0]
            grads /= (2.0 * areas)[:, None, None]
            self._grads = grads
        return self._grads

    def basis_gradients(self):
        """(T, 3, 2) constant gradients of the local basis phi_i."""
        return -2.0 * self.p1_gradients()

    @staticmethod
    def basis_at_bary(bary):
        """Values of phi_i at barycentric points: (nq, 3) for (nq, 3)."""
        return 1.0 - 2.0 * np.asarray(bary, dtype=float)

    def interpolate(self, f):
        """Coefficients of the midpoint interpolant of f(x, y)."""
        m = self.mesh.edge_midpoints
        return np.asarray(f(m[:, 0], m[:, 1]), dtype=float)

    def element_values(self, coeffs, bary):
        """(T, nq) values of the function with given edge coefficients at
        fixed barycentric points on every triangle."""
        phi = self.basis_at_bary(bary)              # (nq, 3)
        c = np.asarray(coeffs)[self.mesh.tri_edges]  # (T, 3)
        return c @ phi.T


class P0Space:
    """Piecewise-constant space: one degree of freedom per triangle."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.ndof = mesh.num_triangles

    @property
    def areas(self):
        return self.mesh.areas


# ---------------------------------------------------------------------------
# assembly


def assemble_cr_laplace(space: CRSpace, region=None):
    """Broken stiffness matrix sum_T int_T grad phi_i . grad phi_j.

    Parameters
    ----------
    space : CRSpace
    region : array of triangle indices or None
        None assembles over the whole mesh with global edge indexing and
        returns just the matrix.  Otherwise the matrix is indexed by the
        region's edges and (matrix, edge_ids) is returned, edge_ids being
        the ascending global edge indices of the region.

    The matrix is symmetric positive semidefinite; constants on the
    region span the kernel.
    """
    mesh = space.mesh
    whole = region is None
    tris = np.arange(mesh.num_triangles) if whole else np.asarray(region, dtype=np.int64)
    if len(tris) == 0:
        raise ValueError("empty assembly region")

    grads = space.basis_gradients()[tris]         # (t, 3, 2)
    areas = mesh.areas[tris]
    ke = np.einsum("tic,tjc,t->tij", grads, grads, areas)  # (t, 3, 3)

    tri_edges = mesh.tri_edges[tris]
    if whole:
        dof = tri_edges
        ndof = mesh.num_edges
    else:
        edge_ids = np.unique(tri_edges)
        lookup = -np.ones(mesh.num_edges, dtype=np.int64)
        lookup[edge_ids] = np.arange(len(edge_ids))
        dof = lookup[tri_edges]
        ndof = len(edge_ids)

    rows = np.repeat(dof, 3, axis=1).ravel()
    cols = np.tile(dof, (1, 3)).ravel()
    K = build_from_triplets(rows, cols, ke.ravel(), ndof, ndof)
    return K if whole else (K, edge_ids)


def assemble_velocity_stiffness(space: CRSpace, mu: float):
    """Velocity stiffness mu * sum_T int_T grad(u) : grad(v), with
    homogeneous Dirichlet boundary-edge dofs eliminated.

    Returns (A, interior_edges): A is block diagonal over the two velocity
    components, each block the interior-edge restriction of mu times the
    scalar Laplace matrix.  Velocity dof c * n_int + k corresponds to
    component c on interior edge interior_edges[k].
    """
    if mu <= 0:
        raise ValueError(f"viscosity must be positive, got {mu}")
    K = assemble_cr_laplace(space)
    ii = space.interior
    Kii = (mu * K)[ii][:, ii].tocsr()
    A = sp.block_diag((Kii, Kii), format="csr")
    return A, ii


def assemble_divergence(vel: CRSpace, pres: P0Space):
    """Coupling matrix B with B[T, vdof] = -int_T div(basis_vdof).

    Velocity dofs are indexed over all edges, component-blocked:
    dof = c * E + e.  The divergence of a nonconforming P1 function is
    constant per triangle, so the integral is exact.
    """
    mesh = vel.mesh
    grads = vel.basis_gradients()        # (T, 3, 2)
    areas = mesh.areas
    E = mesh.num_edges
    T = mesh.num_triangles

    tri_ids = np.repeat(np.arange(T), 3)
    rows, cols, vals = [], [], []
    for c in (0, 1):
        rows.append(tri_ids)
        cols.append((mesh.tri_edges + c * E).ravel())
        vals.append((-grads[:, :, c] * areas[:, None]).ravel())
    return build_from_triplets(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), T, 2 * E)
