"""Level-set classification of mesh elements and cut geometry.

A level-set function phi splits the domain into a minus region (phi < 0),
a plus region (phi > 0) and the interface (phi = 0).  Triangles are
classified from their vertex values; triangles with mixed signs are
interface triangles and get a straight-segment cut through the two edge
intersection points.  Vertex values within a snapping tolerance of zero
are pushed to the plus side so that no degenerate cuts occur.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .mesh import AffineMap, Mesh

__all__ = [
    "LevelSet",
    "Classification",
    "CutGeometry",
    "NonSimpleCutError",
    "MINUS",
    "PLUS",
    "INTERFACE",
    "classify",
    "edge_intersection",
    "cut_element",
    "cut_all",
    "polygon_area",
]

MINUS = -1
PLUS = 1
INTERFACE = 0

SNAP_REL = 1e-10


class NonSimpleCutError(RuntimeError):
    """Interface crosses a triangle in a way a single segment cannot
    represent (grid too coarse for the interface)."""


class LevelSet:
    """Scalar field phi(x, y) with optional analytic gradient.

    phi must accept numpy arrays.  When no gradient is supplied, normals
    fall back to central differences.
    """

    def __init__(self, phi: Callable, grad: Optional[Callable] = None):
        self.phi = phi
        self.grad = grad

    def __call__(self, x, y):
        return self.phi(x, y)

    def gradient(self, x: float, y: float, step: float = 1e-6):
        if self.grad is not None:
            return np.asarray(self.grad(x, y), dtype=float)
        gx = (self.phi(x + step, y) - self.phi(x - step, y)) / (2 * step)
        gy = (self.phi(x, y + step) - self.phi(x, y - step)) / (2 * step)
        return np.array([gx, gy])


@dataclass
class Classification:
    """Element and edge tags for one mesh/level-set pair.

    tri_tag is MINUS / PLUS / INTERFACE per triangle.  star_tris are the
    fully-minus triangles (the minus region with the interface strip
    removed); minus_region_tris = star_tris + interface_tris.
    """

    tri_tag: np.ndarray            # (T,) int
    vertex_values: np.ndarray      # (V,) snapped level-set values
    interface_tris: np.ndarray     # indices, ascending
    star_tris: np.ndarray
    plus_tris: np.ndarray
    minus_region_tris: np.ndarray
    interface_edge: np.ndarray     # (E,) bool


def classify(mesh: Mesh, level_set: LevelSet) -> Classification:
    """Tag triangles and edges of `mesh` against `level_set`.

    Vertex values with |phi| below 1e-10 times the domain extent are
    snapped to that positive threshold, which guarantees every interface
    triangle has exactly two cut edges and nonempty parts on both sides.
    """
    v = mesh.vertices
    vals = np.asarray(level_set(v[:, 0], v[:, 1]), dtype=float).copy()
    snap = SNAP_REL * mesh.domain.extent
    vals[np.abs(vals) < snap] = snap

    tri_vals = vals[mesh.triangles]          # (T, 3)
    neg = tri_vals < 0
    nneg = neg.sum(axis=1)
    tag = np.where(nneg == 3, MINUS, np.where(nneg == 0, PLUS, INTERFACE))

    ev = vals[mesh.edges]                    # (E, 2)
    interface_edge = ev[:, 0] * ev[:, 1] < 0

    tri_ids = np.arange(mesh.num_triangles)
    return Classification(
        tri_tag=tag,
        vertex_values=vals,
        interface_tris=tri_ids[tag == INTERFACE],
        star_tris=tri_ids[tag == MINUS],
        plus_tris=tri_ids[tag == PLUS],
        minus_region_tris=tri_ids[tag != PLUS],
        interface_edge=interface_edge,
    )


def edge_intersection(v1, v2, f1: float, f2: float):
    """Zero of the linear interpolant of (f1, f2) along segment v1--v2.

    f1 and f2 must have opposite signs; returns v1 + t (v2 - v1) with
    t = f1 / (f1 - f2) in (0, 1).
    """
    if f1 * f2 >= 0:
        raise ValueError(f"endpoint values must have opposite signs, got {f1}, {f2}")
    t = f1 / (f1 - f2)
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    return v1 + t * (v2 - v1)


def polygon_area(poly) -> float:
    """Signed shoelace area (positive for counterclockwise order)."""
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass
class CutGeometry:
    """Straight-segment cut of one interface triangle.

    Local vertices are relabeled so the vertex shared by the two cut edges
    sits at the reference origin: `local_order` lists the triangle's local
    vertex indices in the roles (A1, A2, A3) of the reference triangle
    (0,1), (0,0), (1,0).  B1 = frame(a, 0) lies on the A2-A3 edge and
    B2 = frame(0, b) on the A2-A1 edge.
    """

    tri: int
    local_order: tuple[int, int, int]   # local indices playing (A1, A2, A3)
    frame: AffineMap                    # reference -> physical, relabeled
    a: float
    b: float
    b1: np.ndarray
    b2: np.ndarray
    b0: np.ndarray
    n_seg: np.ndarray                   # unit normal, minus side -> plus side
    seg_length: float
    poly_minus: np.ndarray              # (k, 2) ccw
    poly_plus: np.ndarray
    minus_at_origin: bool               # shared vertex lies on the minus side
    cut_edges: tuple[int, int]          # global edge ids holding B1, B2
    minus_ends: tuple[np.ndarray, np.ndarray]  # minus-side endpoint per cut edge

    def edge_splits(self):
        """Per cut edge: (edge id, intersection point, minus endpoint).

        The intersection point divides the edge into a sub-segment on the
        minus side (between the returned endpoint and the point) and one
        on the plus side.
        """
        return list(zip(self.cut_edges, (self.b1, self.b2), self.minus_ends))


def cut_element(mesh: Mesh, cls: Classification, t: int) -> CutGeometry:
    """Cut geometry for interface triangle t.

    Raises NonSimpleCutError unless the triangle has exactly two cut
    edges (always true for mixed snapped vertex signs).
    """
    tri = mesh.triangles[t]
    verts = mesh.vertices[tri]
    vals = cls.vertex_values[tri]

    # local edge i (opposite local vertex i) joins local vertices i+1, i+2
    cut_local = [
        i for i in range(3)
        if vals[(i + 1) % 3] * vals[(i + 2) % 3] < 0
    ]
    if len(cut_local) != 2:
        raise NonSimpleCutError(
            f"triangle {t} has {len(cut_local)} cut edges, expected 2"
        )

    # the shared vertex of the two cut edges is opposite the uncut edge
    uncut = ({0, 1, 2} - set(cut_local)).pop()
    i_a2 = uncut
    i_a3 = (uncut + 1) % 3          # counterclockwise-next maps to A3
    i_a1 = (uncut + 2) % 3

    frame = AffineMap.from_vertices(verts[i_a1], verts[i_a2], verts[i_a3])

    # intersections on the A2-A3 and A2-A1 edges; the parameter from the
    # shared vertex is the local coordinate (a resp. b)
    a_pt = edge_intersection(verts[i_a2], verts[i_a3], vals[i_a2], vals[i_a3])
    b_pt = edge_intersection(verts[i_a2], verts[i_a1], vals[i_a2], vals[i_a1])
    a = vals[i_a2] / (vals[i_a2] - vals[i_a3])
    b = vals[i_a2] / (vals[i_a2] - vals[i_a1])

    b0 = 0.5 * (a_pt + b_pt)
    seg = b_pt - a_pt
    seg_length = float(np.hypot(seg[0], seg[1]))
    n = np.array([seg[1], -seg[0]]) / seg_length

    minus_at_origin = vals[i_a2] < 0
    # orient the normal off the shared vertex when that vertex is on the
    # minus side, toward it otherwise
    toward_origin = np.dot(n, verts[i_a2] - b0)
    if (toward_origin > 0) == minus_at_origin:
        n = -n

    tri_near = np.array([verts[i_a2], a_pt, b_pt])
    quad_far = np.array([a_pt, verts[i_a3], verts[i_a1], b_pt])
    if minus_at_origin:
        poly_minus, poly_plus = tri_near, quad_far
    else:
        poly_minus, poly_plus = quad_far, tri_near

    # global edges: local edge opposite i_a1 is (A2, A3), opposite i_a3 is (A1, A2)
    e_b1 = mesh.tri_edges[t, i_a1]
    e_b2 = mesh.tri_edges[t, i_a3]
    if minus_at_origin:
        minus_ends = (verts[i_a2].copy(), verts[i_a2].copy())
    else:
        minus_ends = (verts[i_a3].copy(), verts[i_a1].copy())

    return CutGeometry(
        tri=t,
        local_order=(i_a1, i_a2, i_a3),
        frame=frame,
        a=float(a),
        b=float(b),
        b1=a_pt,
        b2=b_pt,
        b0=b0,
        n_seg=n,
        seg_length=seg_length,
        poly_minus=poly_minus,
        poly_plus=poly_plus,
        minus_at_origin=bool(minus_at_origin),
        cut_edges=(int(e_b1), int(e_b2)),
        minus_ends=minus_ends,
    )


def cut_all(mesh: Mesh, cls: Classification) -> dict[int, CutGeometry]:
    """Cut geometry for every interface triangle, keyed by triangle index."""
    return {int(t): cut_element(mesh, cls, int(t)) for t in cls.interface_tris}
