"""Quadrature on polygonal cells and on straight faces.

Cell rules are built by a fan sub-triangulation from the cell centroid; each
sub-triangle carries a collapsed (conical product) Gauss rule.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (n, 2) physical points
    weights: np.ndarray  # (n,)
    degree: int

    def integrate(self, values):
        return np.tensordot(self.weights, values, axes=(0, 0))

    def __len__(self):
        return len(self.weights)


def _npoints(degree):
    return max(1, (degree + 2) // 2)


@lru_cache(maxsize=None)
def gauss_segment(degree):
    """Gauss-Legendre nodes/weights on [0, 1], exact to `degree`."""
    t, w = roots_legendre(_npoints(degree))
    return 0.5 * (t + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def reference_triangle(degree):
    """Rule on the triangle (0,0), (1,0), (0,1), exact to total degree `degree`.

    Collapsed coordinates x = u, y = (1 - u) v; the Jacobian factor (1 - u)
    is absorbed by a Gauss-Jacobi rule in u.
    """
    n = _npoints(degree)
    tu, wu = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (tu + 1.0)
    wu = 0.25 * wu
    v, wv = gauss_segment(degree)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = np.column_stack([uu.ravel(), ((1.0 - uu) * vv).ravel()])
    wts = np.outer(wu, wv).ravel()
    return pts, wts


def triangle_rule(a, b, c, degree):
    pts, wts = reference_triangle(degree)
    a = np.asarray(a, dtype=float)
    e1 = np.asarray(b, dtype=float) - a
    e2 = np.asarray(c, dtype=float) - a
    jac = e1[0] * e2[1] - e1[1] * e2[0]
    x = a + pts[:, :1] * e1 + pts[:, 1:] * e2
    return x, wts * abs(jac), jac


class NotStarShapedError(ValueError):
    pass


def polygon_rule(vertices, center, degree):
    """Fan rule over a polygon given by its counterclockwise vertex loop."""
    vertices = np.asarray(vertices, dtype=float)
    pts, wts = [], []
    n = len(vertices)
    for i in range(n):
        x, w, jac = triangle_rule(center, vertices[i], vertices[(i + 1) % n], degree)
        if jac <= 0.0:
            raise NotStarShapedError(
                f"fan triangle {i} has signed area {0.5 * jac:.3e}; "
                "cell is not star-shaped with respect to its centroid"
            )
        pts.append(x)
        wts.append(w)
    return QuadratureRule(np.vstack(pts), np.concatenate(wts), degree)


def segment_rule(p0, p1, degree):
    """Gauss-Legendre rule mapped to the segment p0 -> p1 (weights sum to its length)."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    t, w = gauss_segment(degree)
    length = np.linalg.norm(p1 - p0)
    return QuadratureRule(p0 + t[:, None] * (p1 - p0), w * length, degree)


def cell_quadrature(mesh, cell_id, exactness_degree):
    if exactness_degree < 0:
        raise ValueError("exactness degree must be non-negative")
    return polygon_rule(
        mesh.cell_vertices(cell_id), mesh.cell_centroids[cell_id], exactness_degree
    )


def face_quadrature(mesh, face_id, exactness_degree):
    if exactness_degree < 0:
        raise ValueError("exactness degree must be non-negative")
    v0, v1 = mesh.faces[face_id]
    return segment_rule(mesh.vertices[v0], mesh.vertices[v1], exactness_degree)
