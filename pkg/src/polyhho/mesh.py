"""Polytopal meshes of the unit square: representation, generators and text I/O.

Text format (ASCII, '#' starts a comment)::

    NV NF NC
    x y                       (NV lines)
    v0 v1 boundary_flag       (NF lines)
    n f0 f1 ... f{n-1}        (NC lines, faces listed counterclockwise)
"""

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

FAMILIES = ("triangular", "cartesian", "kershaw", "hexagonal")
KERSHAW_DISTORTION = 0.3


class MeshError(ValueError):
    pass


@dataclass(eq=False)
class PolytopalMesh:
    """Immutable 2D polygonal mesh.

    `cells[c]` lists face ids in counterclockwise order and `cell_face_signs[c]`
    holds +1 where the global face normal points out of cell `c`, -1 otherwise.
    Global normals point from the lower-id to the higher-id incident cell, and
    outward on the boundary.
    """

    vertices: np.ndarray
    faces: np.ndarray
    cells: list
    boundary_flags: np.ndarray = field(init=False)
    face_cells: list = field(init=False)
    cell_face_signs: list = field(init=False)
    cell_loops: list = field(init=False)
    cell_areas: np.ndarray = field(init=False)
    cell_centroids: np.ndarray = field(init=False)
    cell_diameters: np.ndarray = field(init=False)
    face_diameters: np.ndarray = field(init=False)
    face_midpoints: np.ndarray = field(init=False)
    face_normals: np.ndarray = field(init=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 2)
        self.cells = [np.asarray(c, dtype=np.int64) for c in self.cells]
        nv, nf = len(self.vertices), len(self.faces)
        if nf and (self.faces.min() < 0 or self.faces.max() >= nv):
            raise MeshError("dangling vertex index in face list")

        incident = [[] for _ in range(nf)]
        for c, fl in enumerate(self.cells):
            if len(fl) < 3:
                raise MeshError(f"cell {c} has fewer than 3 faces")
            if fl.min() < 0 or fl.max() >= nf:
                raise MeshError(f"cell {c} references an unknown face")
            for f in fl:
                incident[f].append(c)
        for f, cs in enumerate(incident):
            if len(cs) > 2:
                raise MeshError(f"non-manifold face {f}: shared by {len(cs)} cells")
            if not cs:
                raise MeshError(f"face {f} belongs to no cell")
        self.face_cells = [sorted(cs) for cs in incident]
        self.boundary_flags = np.array([len(cs) == 1 for cs in incident], dtype=bool)

        self.cell_loops = []
        for c, fl in enumerate(self.cells):
            loop = self._vertex_loop(c, fl)
            if _signed_area(self.vertices[loop]) < 0.0:
                self.cells[c] = fl[::-1].copy()
                loop = self._vertex_loop(c, self.cells[c])
            self.cell_loops.append(loop)

        p0 = self.vertices[self.faces[:, 0]]
        p1 = self.vertices[self.faces[:, 1]]
        d = p1 - p0
        self.face_diameters = np.hypot(d[:, 0], d[:, 1])
        self.face_midpoints = 0.5 * (p0 + p1)
        normals = np.column_stack([d[:, 1], -d[:, 0]]) / self.face_diameters[:, None]

        self.cell_areas = np.empty(len(self.cells))
        self.cell_centroids = np.empty((len(self.cells), 2))
        self.cell_diameters = np.empty(len(self.cells))
        for c, loop in enumerate(self.cell_loops):
            xy = self.vertices[loop]
            self.cell_areas[c], self.cell_centroids[c] = _area_centroid(xy)
            diff = xy[:, None, :] - xy[None, :, :]
            self.cell_diameters[c] = np.sqrt((diff**2).sum(-1).max())

        # orient each global normal out of its lowest-id incident cell
        for f in range(nf):
            c = self.face_cells[f][0]
            if np.dot(normals[f], self.face_midpoints[f] - self.cell_centroids[c]) < 0.0:
                normals[f] *= -1.0
        self.face_normals = normals
        self.cell_face_signs = [
            np.array([1.0 if self.face_cells[f][0] == c else -1.0 for f in fl])
            for c, fl in enumerate(self.cells)
        ]

    def _vertex_loop(self, c, fl):
        loop = []
        a, b = self.faces[fl[0]]
        nxt = self.faces[fl[1 % len(fl)]]
        if b not in nxt:
            a, b = b, a
        if b not in nxt:
            raise MeshError(f"cell {c}: faces {fl[0]} and {fl[1]} are not adjacent")
        loop.append(a)
        cur = b
        for f in fl[1:]:
            u, v = self.faces[f]
            if u == cur:
                loop.append(u)
                cur = v
            elif v == cur:
                loop.append(v)
                cur = u
            else:
                raise MeshError(f"cell {c}: face loop is not closed at face {f}")
        if cur != loop[0]:
            raise MeshError(f"cell {c}: face loop is not closed")
        return np.array(loop, dtype=np.int64)

    @property
    def num_cells(self):
        return len(self.cells)

    @property
    def num_faces(self):
        return len(self.faces)

    @property
    def interior_faces(self):
        return np.flatnonzero(~self.boundary_flags)

    @property
    def h(self):
        return float(self.cell_diameters.max())

    def cell_vertices(self, c):
        return self.vertices[self.cell_loops[c]]

    def cell_normals(self, c):
        """Outward unit normals n_TF for the faces of cell c, in `cells[c]` order."""
        return self.face_normals[self.cells[c]] * self.cell_face_signs[c][:, None]

    def check(self, area=1.0, tol=1e-12):
        """Raise MeshError if a structural invariant is violated."""
        if abs(self.cell_areas.sum() - area) > tol * area:
            raise MeshError(f"cell areas sum to {self.cell_areas.sum()!r}, expected {area}")
        for c, fl in enumerate(self.cells):
            n = self.cell_normals(c)
            closure = (n * self.face_diameters[fl, None]).sum(0)
            if np.abs(closure).max() > tol * max(1.0, self.cell_diameters[c]):
                raise MeshError(f"cell {c}: boundary is not closed")
            if np.any(self.face_diameters[fl] > self.cell_diameters[c] + tol):
                raise MeshError(f"cell {c}: face longer than the cell diameter")
        return True


def _signed_area(xy):
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _area_centroid(xy):
    x, y = xy[:, 0], xy[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return area, np.array([cx, cy])


def mesh_from_polygons(vertices, polygons):
    """Build a mesh from counterclockwise vertex loops; faces are numbered by first use."""
    edge_ids = {}
    faces = []
    cells = []
    for loop in polygons:
        fl = []
        for i in range(len(loop)):
            a, b = int(loop[i]), int(loop[(i + 1) % len(loop)])
            key = (min(a, b), max(a, b))
            if key not in edge_ids:
                edge_ids[key] = len(faces)
                faces.append((a, b))
            fl.append(edge_ids[key])
        cells.append(fl)
    return PolytopalMesh(np.asarray(vertices, dtype=float), np.array(faces), cells)


def _grid_vertices(n, mapping=None):
    xi = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xi, xi, indexing="ij")
    if mapping is not None:
        X, Y = mapping(X, Y)
    return np.column_stack([X.ravel(), Y.ravel()])


def _quad_loops(n):
    vid = lambda i, j: i * (n + 1) + j  # noqa: E731
    return [
        [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
        for j in range(n)
        for i in range(n)
    ]


def cartesian_mesh(n):
    return mesh_from_polygons(_grid_vertices(n), _quad_loops(n))


def triangular_mesh(n):
    loops = []
    for a, b, c, d in _quad_loops(n):
        loops += [[a, b, c], [a, c, d]]
    return mesh_from_polygons(_grid_vertices(n), loops)


def kershaw_map(X, Y, delta=KERSHAW_DISTORTION):
    """Smooth double-S shear of the vertical grid lines; identity on the boundary.

    The horizontal stretch dx/dxi stays within [1 - 2*delta, 1 + 2*delta].
    """
    return X + 2.0 * delta / np.pi * np.sin(np.pi * X) * np.sin(2.0 * np.pi * Y), Y


def kershaw_mesh(n, delta=KERSHAW_DISTORTION):
    return mesh_from_polygons(
        _grid_vertices(n, lambda X, Y: kershaw_map(X, Y, delta)), _quad_loops(n)
    )


def _clip_box(poly, xmax, ymax):
    """Sutherland-Hodgman clip of an exact (Fraction) polygon to [0,xmax]x[0,ymax]."""
    def clip(pts, inside, cut):
        out = []
        for i, cur in enumerate(pts):
            prev = pts[i - 1]
            if inside(cur):
                if not inside(prev):
                    out.append(cut(prev, cur))
                out.append(cur)
            elif inside(prev):
                out.append(cut(prev, cur))
        return out

    def at_x(x0):
        return lambda p, q: (x0, p[1] + (q[1] - p[1]) * (x0 - p[0]) / (q[0] - p[0]))

    def at_y(y0):
        return lambda p, q: (p[0] + (q[0] - p[0]) * (y0 - p[1]) / (q[1] - p[1]), y0)

    pts = list(poly)
    pts = clip(pts, lambda p: p[0] >= 0, at_x(0))
    pts = clip(pts, lambda p: p[0] <= xmax, at_x(xmax))
    pts = clip(pts, lambda p: p[1] >= 0, at_y(0))
    pts = clip(pts, lambda p: p[1] <= ymax, at_y(ymax))
    dedup = []
    for p in pts:
        if not dedup or p != dedup[-1]:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def hexagonal_mesh(n):
    """Pointy-top hexagons clipped to the unit square through boundary cell centers.

    Rows are spaced so the hexagons are as close to regular as an exact fit of
    `n` columns allows; boundary cells become pentagons and quadrilaterals.
    Coordinates are handled exactly in lattice units (dx/2 horizontally, a
    third of the row spacing vertically) to keep the mesh conforming.
    """
    m = max(1, int(round(2.0 * n / np.sqrt(3.0))))
    xmax, ymax = 2 * n, 3 * m
    offsets = [(0, -2), (1, -1), (1, 1), (0, 2), (-1, 1), (-1, -1)]
    keys = {}
    loops = []
    for j in range(m + 1):
        centers = range(0, 2 * n + 1, 2) if j % 2 == 0 else range(1, 2 * n, 2)
        for cx in centers:
            cy = 3 * j
            poly = [(Fraction(cx + dx), Fraction(cy + dy)) for dx, dy in offsets]
            clipped = _clip_box(poly, xmax, ymax)
            if len(clipped) < 3:
                continue
            loop = []
            for p in clipped:
                loop.append(keys.setdefault(p, len(keys)))
            loops.append(loop)
    verts = np.empty((len(keys), 2))
    for (x, y), i in keys.items():
        verts[i] = (float(x) / xmax, float(y) / ymax)
    mesh = mesh_from_polygons(verts, loops)
    return mesh


def generate_mesh(family, refinement_level):
    """Mesh of (0,1)^2 from one of the four families; level 0 is the coarsest."""
    if refinement_level < 0:
        raise ValueError("refinement level must be >= 0")
    n = 4 * 2**refinement_level
    if family == "cartesian":
        return cartesian_mesh(n)
    if family == "triangular":
        return triangular_mesh(n)
    if family == "kershaw":
        return kershaw_mesh(n)
    if family == "hexagonal":
        return hexagonal_mesh(n)
    raise ValueError(f"unsupported mesh family {family!r}; expected one of {FAMILIES}")


def format_mesh(mesh):
    lines = [f"{len(mesh.vertices)} {mesh.num_faces} {mesh.num_cells}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [
        f"{a} {b} {int(flag)}" for (a, b), flag in zip(mesh.faces.tolist(), mesh.boundary_flags)
    ]
    lines += [" ".join(map(str, [len(fl), *fl.tolist()])) for fl in mesh.cells]
    return "\n".join(lines) + "\n"


def write_mesh(mesh, path):
    Path(path).write_text(format_mesh(mesh))


def parse_mesh(text):
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows or len(rows[0]) != 3:
        raise MeshError("malformed header: expected 'NV NF NC'")
    try:
        nv, nf, nc = (int(t) for t in rows[0])
    except ValueError as exc:
        raise MeshError("malformed header: counts must be integers") from exc
    if len(rows) != 1 + nv + nf + nc:
        raise MeshError(
            f"malformed counts: header announces {nv + nf + nc} records, found {len(rows) - 1}"
        )
    try:
        verts = np.array([[float(t) for t in r] for r in rows[1 : 1 + nv]])
        frows = rows[1 + nv : 1 + nv + nf]
        faces = np.array([[int(r[0]), int(r[1])] for r in frows], dtype=np.int64)
        flags = np.array([int(r[2]) for r in frows], dtype=bool)
        cells = []
        for r in rows[1 + nv + nf :]:
            k = int(r[0])
            if len(r) != k + 1:
                raise MeshError(f"malformed cell record {' '.join(r)!r}")
            cells.append([int(t) for t in r[1:]])
    except (ValueError, IndexError) as exc:
        raise MeshError(f"malformed record: {exc}") from exc
    if verts.shape != (nv, 2) or any(len(r) != 3 for r in frows):
        raise MeshError("malformed vertex or face record")
    mesh = PolytopalMesh(verts, faces, cells)
    if not np.array_equal(flags, mesh.boundary_flags):
        bad = np.flatnonzero(flags != mesh.boundary_flags)
        raise MeshError(f"boundary flag inconsistent with incidence for faces {bad.tolist()}")
    return mesh


def read_mesh(path):
    return parse_mesh(Path(path).read_text())
