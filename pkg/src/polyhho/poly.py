"""Scaled monomial bases on cells and faces, and the L2 projectors onto them."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .quadrature import QuadratureRule, cell_quadrature, face_quadrature


def monomial_exponents(degree):
    """All (a, b) with a + b <= degree, graded by total degree."""
    return [(d - b, b) for d in range(degree + 1) for b in range(d + 1)]


def dim_cell(degree):
    return (degree + 1) * (degree + 2) // 2


def dim_face(degree):
    return degree + 1


class DegenerateBasisError(LinAlgError):
    pass


def _cholesky(mat, what):
    try:
        return cho_factor(mat, lower=True)
    except LinAlgError as exc:
        raise DegenerateBasisError(f"{what}: mass matrix is not positive definite") from exc


@dataclass(eq=False)
class CellBasisSet:
    """Monomials ((x - x_T)/h_T)^a ((y - y_T)/h_T)^b of total degree <= `degree`.

    Lower-degree bases are leading slices: the first `dim_cell(l)` functions
    span P^l(T).
    """

    degree: int
    cell_id: int
    center: np.ndarray
    scale: float
    quad: QuadratureRule
    exponents: np.ndarray = field(init=False)
    values: np.ndarray = field(init=False)  # (nq, dim) at quad.points
    grads: np.ndarray = field(init=False)  # (nq, dim, 2)
    mass_matrix: np.ndarray = field(init=False)
    stiffness_matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        self.exponents = np.array(monomial_exponents(self.degree), dtype=np.int64)
        self.values = self.eval(self.quad.points)
        self.grads = self.grad(self.quad.points)
        w = self.quad.weights
        self.mass_matrix = self.values.T @ (w[:, None] * self.values)
        self.stiffness_matrix = np.einsum("qid,q,qjd->ij", self.grads, w, self.grads)
        self._chol = {}

    @property
    def dim(self):
        return len(self.exponents)

    def _scaled(self, points):
        return (np.asarray(points, dtype=float) - self.center) / self.scale

    def eval(self, points):
        s = self._scaled(points)
        a, b = self.exponents[:, 0], self.exponents[:, 1]
        return s[:, :1] ** a * s[:, 1:] ** b

    def grad(self, points):
        s = self._scaled(points)
        a, b = self.exponents[:, 0], self.exponents[:, 1]
        x, y = s[:, :1], s[:, 1:]
        dx = a * x ** np.maximum(a - 1, 0) * y**b / self.scale
        dy = b * x**a * y ** np.maximum(b - 1, 0) / self.scale
        return np.stack([dx, dy], axis=-1)

    def mass(self, degree=None):
        n = self.dim if degree is None else dim_cell(degree)
        return self.mass_matrix[:n, :n]

    def factor(self, degree=None):
        n = self.dim if degree is None else dim_cell(degree)
        if n not in self._chol:
            self._chol[n] = _cholesky(self.mass_matrix[:n, :n], f"cell {self.cell_id}")
        return self._chol[n]

    def solve_mass(self, rhs, degree=None):
        return cho_solve(self.factor(degree), rhs)

    def evaluate(self, coeffs, points):
        coeffs = np.asarray(coeffs)
        return self.eval(points)[:, : len(coeffs)] @ coeffs


@dataclass(eq=False)
class FaceBasisSet:
    """1D monomials ((s - s_mid)/h_F)^j in the arclength coordinate of the face.

    The tangent follows the global face orientation (first to second vertex),
    so the basis is shared by both incident cells.
    """

    degree: int
    face_id: int
    midpoint: np.ndarray
    tangent: np.ndarray
    scale: float
    quad: QuadratureRule
    values: np.ndarray = field(init=False)
    mass_matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        self.values = self.eval(self.quad.points)
        self.mass_matrix = self.values.T @ (self.quad.weights[:, None] * self.values)
        self._chol = _cholesky(self.mass_matrix, f"face {self.face_id}")

    @property
    def dim(self):
        return self.degree + 1

    def eval(self, points):
        s = (np.asarray(points, dtype=float) - self.midpoint) @ self.tangent / self.scale
        return s[:, None] ** np.arange(self.degree + 1)

    def solve_mass(self, rhs):
        return cho_solve(self._chol, rhs)

    def evaluate(self, coeffs, points):
        return self.eval(points) @ np.asarray(coeffs)


def cell_basis(mesh, cell_id, degree, quad_degree):
    return CellBasisSet(
        degree,
        cell_id,
        mesh.cell_centroids[cell_id].copy(),
        float(mesh.cell_diameters[cell_id]),
        cell_quadrature(mesh, cell_id, quad_degree),
    )


def face_basis(mesh, face_id, degree, quad_degree):
    v0, v1 = mesh.faces[face_id]
    t = mesh.vertices[v1] - mesh.vertices[v0]
    return FaceBasisSet(
        degree,
        face_id,
        mesh.face_midpoints[face_id].copy(),
        t / np.linalg.norm(t),
        float(mesh.face_diameters[face_id]),
        face_quadrature(mesh, face_id, quad_degree),
    )


def project_cell(basis, f, degree=None):
    """Coefficients of the L2(T) projection of `f` onto P^degree(T).

    `f` maps an (n, 2) array of points to n values.
    """
    n = basis.dim if degree is None else dim_cell(degree)
    fq = np.asarray(f(basis.quad.points), dtype=float)
    rhs = basis.values[:, :n].T @ (basis.quad.weights * fq)
    return basis.solve_mass(rhs, degree)


def project_face(basis, f):
    fq = np.asarray(f(basis.quad.points), dtype=float)
    rhs = basis.values.T @ (basis.quad.weights * fq)
    return basis.solve_mass(rhs)


def projection_error(mesh, f, degree, quad_degree=None):
    """Global L2 norm of f - pi^degree_T f, cell by cell."""
    q = quad_degree if quad_degree is not None else 2 * (degree + 2)
    total = 0.0
    for c in range(mesh.num_cells):
        b = cell_basis(mesh, c, degree, q)
        coeffs = project_cell(b, f)
        r = f(b.quad.points) - b.values @ coeffs
        total += float(b.quad.weights @ r**2)
    return np.sqrt(total)


def observed_orders(hs, errors):
    hs, errors = np.asarray(hs, dtype=float), np.asarray(errors, dtype=float)
    return np.log(errors[1:] / errors[:-1]) / np.log(hs[1:] / hs[:-1])


def approximation_decay_check(f, degree, meshes, quad_degree=None):
    """Errors and observed orders of the cellwise L2 projection over a mesh sequence."""
    hs = [m.h for m in meshes]
    errs = [projection_error(m, f, degree, quad_degree) for m in meshes]
    return np.array(errs), observed_orders(hs, errs)
