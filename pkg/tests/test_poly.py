import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from polyhho.mesh import FAMILIES, generate_mesh, mesh_from_polygons
from polyhho.poly import (
    approximation_decay_check,
    cell_basis,
    dim_cell,
    face_basis,
    monomial_exponents,
    project_cell,
    project_face,
)

SQUARE = mesh_from_polygons([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]])


def green_monomial_integral(verts, center, scale, A, B):
    """int_T s^A t^B with s = (x - xc)/h, t = (y - yc)/h, via the boundary integral
    of h s^{A+1} t^B / (A + 1) dy; each edge is integrated by an exact Gauss rule."""
    g, w = np.polynomial.legendre.leggauss(A + B + 2)
    g, w = 0.5 * (g + 1), 0.5 * w
    total = 0.0
    for i in range(len(verts)):
        p, q = verts[i], verts[(i + 1) % len(verts)]
        pts = p + g[:, None] * (q - p)
        s = (pts[:, 0] - center[0]) / scale
        t = (pts[:, 1] - center[1]) / scale
        total += (q[1] - p[1]) * (w @ (scale * s ** (A + 1) * t**B / (A + 1)))
    return total


def test_exponents_are_graded():
    assert monomial_exponents(2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert [dim_cell(k) for k in range(4)] == [1, 3, 6, 10]


@pytest.mark.parametrize("family", FAMILIES)
def test_mass_and_stiffness_against_boundary_oracle(family):
    m = generate_mesh(family, 1)
    for c in (0, m.num_cells // 2):
        b = cell_basis(m, c, 3, 6)
        ex = b.exponents
        v = m.cell_vertices(c)
        M = np.array([[green_monomial_integral(v, b.center, b.scale, *(ei + ej)) for ej in ex] for ei in ex])
        assert np.allclose(b.mass_matrix, M, rtol=1e-12, atol=1e-12 * np.abs(M).max())
        K = np.zeros_like(M)
        for i, (ai, bi) in enumerate(ex):
            for j, (aj, bj) in enumerate(ex):
                val = 0.0
                if ai and aj:
                    val += ai * aj * green_monomial_integral(v, b.center, b.scale, ai + aj - 2, bi + bj)
                if bi and bj:
                    val += bi * bj * green_monomial_integral(v, b.center, b.scale, ai + aj, bi + bj - 2)
                K[i, j] = val / b.scale**2
        assert np.allclose(b.stiffness_matrix, K, rtol=1e-12, atol=1e-12 * np.abs(K).max())
        np.linalg.cholesky(b.mass_matrix)


def test_basis_evaluation_formula():
    m = generate_mesh("kershaw", 1)
    b = cell_basis(m, 5, 2, 4)
    p = np.array([[0.3, 0.4], [0.31, 0.2]])
    s = (p - b.center) / b.scale
    expect = np.array([[si[0] ** a * si[1] ** e for a, e in b.exponents] for si in s])
    assert np.allclose(b.eval(p), expect, rtol=1e-15)


@given(st.integers(0, 3), st.sampled_from(FAMILIES), st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_projection_reproduces_span(k, family, seed):
    m = generate_mesh(family, 0)
    rng = np.random.default_rng(seed)
    c = int(rng.integers(m.num_cells))
    b = cell_basis(m, c, k, 2 * k + 2)
    coeffs = rng.standard_normal(b.dim)
    got = project_cell(b, lambda p: b.evaluate(coeffs, p))
    assert np.allclose(got, coeffs, atol=1e-10)
    # idempotence at the coefficient level
    again = project_cell(b, lambda p: b.evaluate(got, p))
    assert np.allclose(again, got, atol=1e-12)


def test_sine_mean_on_unit_square():
    b = cell_basis(SQUARE, 0, 0, 16)
    got = project_cell(b, lambda p: np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1]))
    oracle, _ = integrate.dblquad(lambda y, x: math.sin(math.pi * x) * math.sin(math.pi * y), 0, 1, 0, 1)
    assert oracle == pytest.approx(4 / math.pi**2, abs=1e-12)
    assert got[0] == pytest.approx(oracle, abs=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_projection_orthogonality(family):
    m = generate_mesh(family, 1)
    f = lambda p: np.exp(p[:, 0] + p[:, 1])  # noqa: E731
    for c in (0, 7):
        b = cell_basis(m, c, 2, 12)
        coeffs = project_cell(b, f)
        r = f(b.quad.points) - b.values @ coeffs
        assert np.abs(b.values.T @ (b.quad.weights * r)).max() <= 1e-10


def test_partial_degree_projection_uses_prefix():
    b = cell_basis(SQUARE, 0, 2, 8)
    f = lambda p: p[:, 0] ** 2 + p[:, 1]  # noqa: E731
    lin = project_cell(b, f, degree=1)
    assert len(lin) == 3
    direct = project_cell(cell_basis(SQUARE, 0, 1, 8), f)
    assert np.allclose(lin, direct, atol=1e-13)


def test_face_projections():
    m = generate_mesh("kershaw", 1)
    f_id = int(m.interior_faces[3])
    fb = face_basis(m, f_id, 2, 8)
    assert np.allclose(project_face(fb, lambda p: np.full(len(p), 2.5)), [2.5, 0, 0], atol=1e-13)
    lin = lambda p: 1.0 + 2.0 * p[:, 0] - p[:, 1]  # noqa: E731
    c = project_face(fb, lin)
    q = fb.quad.points
    assert np.allclose(fb.evaluate(c, q), lin(q), atol=1e-13)
    # x^2 at k = 0: face mean of x^2 in closed form
    fb0 = face_basis(m, f_id, 0, 4)
    a, b = m.vertices[m.faces[f_id]]
    mean = (a[0] ** 2 + a[0] * b[0] + b[0] ** 2) / 3
    assert project_face(fb0, lambda p: p[:, 0] ** 2)[0] == pytest.approx(mean, rel=1e-13)


def test_face_basis_shared_orientation():
    m = generate_mesh("hexagonal", 0)
    f_id = int(m.interior_faces[0])
    fb = face_basis(m, f_id, 1, 4)
    v0, v1 = m.vertices[m.faces[f_id]]
    assert fb.eval(v1[None])[0, 1] == pytest.approx(0.5)
    assert fb.eval(v0[None])[0, 1] == pytest.approx(-0.5)


def test_decay_sine_k1():
    meshes = [generate_mesh("cartesian", lvl) for lvl in range(1, 5)]
    _, orders = approximation_decay_check(lambda p: np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1]), 1, meshes)
    assert abs(orders[-1] - 2.0) <= 0.2


def test_decay_exp_k0():
    meshes = [generate_mesh("cartesian", lvl) for lvl in range(1, 5)]
    _, orders = approximation_decay_check(lambda p: np.exp(p[:, 0] * p[:, 1]), 0, meshes)
    assert abs(orders[-1] - 1.0) <= 0.2


@pytest.mark.parametrize("family", FAMILIES)
def test_decay_polynomial_exact(family):
    meshes = [generate_mesh(family, lvl) for lvl in range(0, 3)]
    errs, _ = approximation_decay_check(lambda p: 1 + p[:, 0] * p[:, 1] - p[:, 1] ** 2, 2, meshes)
    assert errs.max() <= 1e-11
