import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyhho.mesh import (
    FAMILIES,
    MeshError,
    PolytopalMesh,
    format_mesh,
    generate_mesh,
    parse_mesh,
    read_mesh,
    write_mesh,
)

MESHES = {(f, lvl): generate_mesh(f, lvl) for f in FAMILIES for lvl in (0, 1, 2)}


def shoelace(xy):
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@pytest.mark.parametrize("key", sorted(MESHES))
def test_structural_invariants(key):
    m = MESHES[key]
    assert m.check()
    assert abs(m.cell_areas.sum() - 1.0) <= 1e-12
    counts = np.array([len(c) for c in m.face_cells])
    assert np.all(counts[m.boundary_flags] == 1)
    assert np.all(counts[~m.boundary_flags] == 2)
    for c, fl in enumerate(m.cells):
        n = m.cell_normals(c)
        assert np.allclose(np.hypot(n[:, 0], n[:, 1]), 1.0, atol=1e-14)
        # outward: normal points away from the cell centroid
        assert np.all(((m.face_midpoints[fl] - m.cell_centroids[c]) * n).sum(1) > 0)
        # closed boundary: sum_F |F| n_TF = 0
        assert np.abs((n * m.face_diameters[fl, None]).sum(0)).max() <= 1e-12
        assert np.all(m.face_diameters[fl] <= m.cell_diameters[c] + 1e-12)
    for f in m.interior_faces:
        c0, c1 = m.face_cells[f]
        n0 = m.cell_normals(c0)[list(m.cells[c0]).index(f)]
        n1 = m.cell_normals(c1)[list(m.cells[c1]).index(f)]
        assert np.allclose(n0, -n1, atol=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
def test_area_sum_matches_shoelace_oracle(family):
    m = MESHES[(family, 1)]
    total = sum(shoelace(m.cell_vertices(c)) for c in range(m.num_cells))
    assert total == pytest.approx(1.0, abs=1e-12)
    assert np.allclose([shoelace(m.cell_vertices(c)) for c in range(m.num_cells)], m.cell_areas, atol=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
def test_refinement_halves_h(family):
    hs = [generate_mesh(family, lvl).h for lvl in range(4)]
    ratios = np.array(hs[1:]) / np.array(hs[:-1])
    assert np.all((ratios >= 0.4) & (ratios <= 0.6))


def test_cartesian_level0():
    m = MESHES[("cartesian", 0)]
    assert (m.num_cells, m.num_faces) == (16, 40)
    assert np.allclose(m.cell_diameters, math.sqrt(2) / 4, atol=1e-15)
    assert len(m.interior_faces) == 24


def test_triangular_level0():
    m = MESHES[("triangular", 0)]
    assert m.num_cells == 32
    assert all(len(c) == 3 for c in m.cells)


@pytest.mark.parametrize("level", [0, 1, 2])
def test_hexagonal_interior_cells_are_hexagons(level):
    m = MESHES[("hexagonal", level)]
    interior = [c for c, fl in enumerate(m.cells) if not m.boundary_flags[fl].any()]
    assert interior
    assert all(len(m.cells[c]) == 6 for c in interior)
    assert {len(fl) for fl in m.cells} <= {3, 4, 5, 6}


def test_kershaw_is_distorted_but_valid():
    m = MESHES[("kershaw", 2)]
    assert m.cell_diameters.max() / m.cell_diameters.min() > 1.5
    # boundary vertices stay on the boundary of the square
    on_b = m.faces[m.boundary_flags].ravel()
    xy = m.vertices[on_b]
    assert np.all(np.isclose(xy, 0.0, atol=1e-15).any(1) | np.isclose(xy, 1.0, atol=1e-15).any(1))


UNIT_SQUARE = """# one square cell
4 4 1
0 0
1 0
1 1
0 1
0 1 1
1 2 1
2 3 1
3 0 1
4 0 1 2 3
"""


def test_single_cell_file():
    m = parse_mesh(UNIT_SQUARE)
    assert m.num_cells == 1
    assert m.cell_areas[0] == pytest.approx(1.0, abs=1e-15)
    assert m.cell_diameters[0] == pytest.approx(math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
def test_round_trip_bytes(tmp_path, family):
    m = MESHES[(family, 1)]
    p1, p2 = tmp_path / "a.mesh", tmp_path / "b.mesh"
    write_mesh(m, p1)
    back = read_mesh(p1)
    write_mesh(back, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.cell_areas, m.cell_areas)


def test_non_manifold_face_rejected():
    text = """4 5 3
0 0
1 0
1 1
0 1
0 1 0
1 2 1
2 0 0
2 3 1
3 0 1
3 0 1 2
3 2 3 4
3 0 1 2
"""
    with pytest.raises(MeshError, match="non-manifold"):
        parse_mesh(text)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("", "header"),
        ("4 4\n", "header"),
        ("a b c\n", "header"),
        ("4 4 1\n0 0\n1 0\n", "counts"),
        (UNIT_SQUARE.replace("4 0 1 2 3", "5 0 1 2 3"), "cell record"),
        (UNIT_SQUARE.replace("3 0 1", "3 0 0"), "boundary flag"),
        (UNIT_SQUARE.replace("4 0 1 2 3", "4 0 2 1 3"), "not"),
        (UNIT_SQUARE.replace("3 0 1", "3 9 1"), "dangling"),
    ],
)
def test_malformed_files(text, msg):
    with pytest.raises(MeshError, match=msg):
        parse_mesh(text)


def test_clockwise_cell_is_reoriented():
    verts = [[0, 0], [1, 0], [1, 1], [0, 1]]
    faces = [[0, 1], [1, 2], [2, 3], [3, 0]]
    m = PolytopalMesh(verts, faces, [[3, 2, 1, 0]])
    assert m.cell_areas[0] == pytest.approx(1.0)
    assert list(m.cells[0]) == [0, 1, 2, 3]


def test_orphan_face_rejected():
    with pytest.raises(MeshError, match="no cell"):
        PolytopalMesh([[0, 0], [1, 0], [0, 1], [1, 1]], [[0, 1], [1, 2], [2, 0], [1, 3]], [[0, 1, 2]])


def test_generate_mesh_errors():
    with pytest.raises(ValueError, match="unsupported"):
        generate_mesh("voronoi", 0)
    with pytest.raises(ValueError):
        generate_mesh("cartesian", -1)


@given(st.sampled_from(FAMILIES), st.integers(0, 2))
@settings(max_examples=12, deadline=None)
def test_constant_flux_closure(family, level):
    """sum_F int_F n_TF . c ds = 0 for any constant vector c."""
    m = MESHES[(family, level)]
    rng = np.random.default_rng(level)
    cvec = rng.standard_normal(2)
    for c, fl in enumerate(m.cells):
        flux = (m.cell_normals(c) @ cvec * m.face_diameters[fl]).sum()
        assert abs(flux) <= 1e-12


def test_format_is_parseable_text():
    text = format_mesh(MESHES[("cartesian", 0)])
    assert text.splitlines()[0] == f"{(4 + 1) ** 2} 40 16"
