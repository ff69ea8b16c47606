"""Local HHO operators on polygonal cells.

Local unknowns of a cell are ordered cell block first, then one block per face
in ascending global face id. Global unknowns place all cell blocks first
(cell-major), followed by all face blocks (face-major).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .poly import cell_basis, dim_cell, dim_face, face_basis, project_cell, project_face


@dataclass
class HybridVector:
    cell_blocks: np.ndarray  # (num_cells, dim P^k(T))
    face_blocks: np.ndarray  # (num_faces, k + 1)

    def flat(self):
        return np.concatenate([self.cell_blocks.ravel(), self.face_blocks.ravel()])

    @classmethod
    def from_flat(cls, space, x):
        x = np.asarray(x, dtype=float)
        nc = space.mesh.num_cells * space.n_cell
        return cls(
            x[:nc].reshape(space.mesh.num_cells, space.n_cell).copy(),
            x[nc:].reshape(space.mesh.num_faces, space.n_face).copy(),
        )

    @classmethod
    def zeros(cls, space):
        return cls.from_flat(space, np.zeros(space.ndof))

    def copy(self):
        return HybridVector(self.cell_blocks.copy(), self.face_blocks.copy())

    def __add__(self, other):
        return HybridVector(self.cell_blocks + other.cell_blocks, self.face_blocks + other.face_blocks)

    def __sub__(self, other):
        return HybridVector(self.cell_blocks - other.cell_blocks, self.face_blocks - other.face_blocks)

    def __mul__(self, s):
        return HybridVector(s * self.cell_blocks, s * self.face_blocks)

    __rmul__ = __mul__

    def boundary_max(self, mesh):
        """Largest |coefficient| over boundary-face blocks (zero on U_{h,0})."""
        b = self.face_blocks[mesh.boundary_flags]
        return float(np.abs(b).max()) if b.size else 0.0


@dataclass(eq=False)
class LocalOperators:
    cell_id: int
    faces: np.ndarray  # global face ids, ascending
    normals: np.ndarray  # outward unit normals, one row per local face
    dofs: np.ndarray  # local -> global unknown map
    R_matrix: np.ndarray  # (dim P^{k+1}, nloc)
    G_matrix: np.ndarray  # (2 * dim P^k, nloc), x-component block first
    S_matrices: list  # per face: (k + 1, nloc)
    face_mass: list  # per face: M_F
    face_h: np.ndarray
    stab_form: np.ndarray  # with unit weights
    # quadrature-point evaluation maps for assembly
    quad_points: np.ndarray
    quad_weights: np.ndarray
    cell_values: np.ndarray  # (nq, dim P^k): cell unknown -> v_T at quad points
    R_values: np.ndarray  # (nq, nloc)
    G_values: np.ndarray  # (2, nq, nloc)
    face_points: list
    face_R_values: list  # per face: (nqf, nloc), R_T v at face quad points
    jump_mass: list  # per face: Gram matrix of v_F - v_T on F

    @property
    def nloc(self):
        return len(self.dofs)

    def stabilization(self, weights):
        """s_T as a matrix: sum over faces of (w_F / h_F) S_F^T M_F S_F."""
        weights = np.asarray(weights, dtype=float)
        if np.any(weights <= 0.0):
            raise ValueError(f"cell {self.cell_id}: stabilization weights must be positive")
        out = np.zeros((self.nloc, self.nloc))
        for w, h, S, M in zip(weights, self.face_h, self.S_matrices, self.face_mass):
            out += (w / h) * (S.T @ M @ S)
        return out

    def face_weights(self, a_of_x):
        """a_TF^inf approximated by max |a| over the face quadrature points."""
        return np.array([np.abs(a_of_x(p)).max() for p in self.face_points])


class HHOSpace:
    """Bases and local operators of U_h^k on a mesh."""

    def __init__(self, mesh, k, quad_degree=None):
        if k < 0:
            raise ValueError("polynomial degree must be >= 0")
        self.mesh = mesh
        self.k = k
        self.quad_degree = 2 * (k + 2) if quad_degree is None else quad_degree
        self.n_cell = dim_cell(k)
        self.n_face = dim_face(k)
        self.ndof = mesh.num_cells * self.n_cell + mesh.num_faces * self.n_face
        self.cell_bases = [cell_basis(mesh, c, k + 1, self.quad_degree) for c in range(mesh.num_cells)]
        self.face_bases = [face_basis(mesh, f, k, self.quad_degree) for f in range(mesh.num_faces)]
        self.ops = [build_local_operators(self, c) for c in range(mesh.num_cells)]

    def face_dof_offset(self):
        return self.mesh.num_cells * self.n_cell

    def interior_face_dofs(self):
        off = self.face_dof_offset()
        f = self.mesh.interior_faces
        return (off + f[:, None] * self.n_face + np.arange(self.n_face)).ravel()

    def local(self, vec, c):
        op = self.ops[c]
        return np.concatenate([vec.cell_blocks[c], vec.face_blocks[op.faces].ravel()])

    def reconstruct(self, vec, c, points):
        """Values of R_T^{k+1} v at arbitrary points of cell c."""
        coeffs = self.ops[c].R_matrix @ self.local(vec, c)
        return self.cell_bases[c].evaluate(coeffs, points)


def _local_layout(space, c):
    mesh = space.mesh
    order = np.argsort(mesh.cells[c])
    faces = mesh.cells[c][order]
    normals = mesh.cell_normals(c)[order]
    nT, nF = space.n_cell, space.n_face
    off = space.face_dof_offset()
    dofs = np.concatenate(
        [c * nT + np.arange(nT)] + [off + f * nF + np.arange(nF) for f in faces]
    )
    return faces, normals, dofs


def _face_block(i, nT, nF):
    return slice(nT + i * nF, nT + (i + 1) * nF)


def build_reconstruction(space, cell_id):
    """Matrix of R_T^{k+1}: local unknowns -> coefficients in P^{k+1}(T).

    The Neumann problem is solved on the non-constant monomials; the constant
    is then fixed by the mean-value condition.
    """
    faces, normals, _ = _local_layout(space, cell_id)
    cb = space.cell_bases[cell_id]
    nT, nF = space.n_cell, space.n_face
    nloc = nT + len(faces) * nF
    K = cb.stiffness_matrix
    rhs = np.zeros((cb.dim, nloc))
    rhs[:, :nT] = K[:, :nT]
    for i, f in enumerate(faces):
        fb = space.face_bases[f]
        w = fb.quad.weights
        gn = cb.grad(fb.quad.points) @ normals[i]  # (nqf, N1)
        phi = cb.eval(fb.quad.points)[:, :nT]
        rhs[:, _face_block(i, nT, nF)] += gn.T @ (w[:, None] * fb.values)
        rhs[:, :nT] -= gn.T @ (w[:, None] * phi)
    R = np.zeros((cb.dim, nloc))
    try:
        R[1:] = cho_solve(cho_factor(K[1:, 1:]), rhs[1:])
    except LinAlgError as exc:
        raise LinAlgError(f"cell {cell_id}: singular reconstruction system") from exc
    means = cb.mass_matrix[0]  # integrals of each monomial
    R[0] = -means[1:] @ R[1:]
    R[0, :nT] += means[:nT]
    R[0] /= means[0]
    return R


def build_gradient_reconstruction(space, cell_id):
    faces, normals, _ = _local_layout(space, cell_id)
    cb = space.cell_bases[cell_id]
    nT, nF = space.n_cell, space.n_face
    nloc = nT + len(faces) * nF
    w = cb.quad.weights
    phi = cb.values[:, :nT]
    G = np.zeros((2 * nT, nloc))
    for d in range(2):
        rhs = np.zeros((nT, nloc))
        rhs[:, :nT] = phi.T @ (w[:, None] * cb.grads[:, :nT, d])
        for i, f in enumerate(faces):
            fb = space.face_bases[f]
            wf = fb.quad.weights * normals[i, d]
            phif = cb.eval(fb.quad.points)[:, :nT]
            rhs[:, _face_block(i, nT, nF)] += phif.T @ (wf[:, None] * fb.values)
            rhs[:, :nT] -= phif.T @ (wf[:, None] * phif)
        G[d * nT : (d + 1) * nT] = cb.solve_mass(rhs, space.k)
    return G


def build_stabilization(space, cell_id, face_weights=None, R=None):
    """Face residual operators S_F^k and the weighted stabilization matrix.

    Returns (S_matrices, stab_form); `face_weights` default to 1.
    """
    faces, normals, _ = _local_layout(space, cell_id)
    cb = space.cell_bases[cell_id]
    nT, nF = space.n_cell, space.n_face
    nloc = nT + len(faces) * nF
    if R is None:
        R = build_reconstruction(space, cell_id)
    w = cb.quad.weights
    # pi_T^k on P^{k+1}, then the high-order remainder R - pi_T^k R
    P = cb.solve_mass(cb.values[:, :nT].T @ (w[:, None] * cb.values), space.k)
    D = R.copy()
    D[:nT] -= P @ R
    S_list, M_list = [], []
    for i, f in enumerate(faces):
        fb = space.face_bases[f]
        phif = cb.eval(fb.quad.points)
        vals = -phif @ D
        vals[:, :nT] -= phif[:, :nT]
        vals[:, _face_block(i, nT, nF)] += fb.values
        S_list.append(fb.solve_mass(fb.values.T @ (fb.quad.weights[:, None] * vals)))
        M_list.append(fb.mass_matrix)
    if face_weights is None:
        face_weights = np.ones(len(faces))
    face_weights = np.asarray(face_weights, dtype=float)
    if np.any(face_weights <= 0.0):
        raise ValueError("stabilization weights must be positive")
    h = space.mesh.face_diameters[faces]
    stab = np.zeros((nloc, nloc))
    for wt, hf, S, M in zip(face_weights, h, S_list, M_list):
        stab += (wt / hf) * (S.T @ M @ S)
    return S_list, stab


def build_local_operators(space, cell_id):
    faces, normals, dofs = _local_layout(space, cell_id)
    cb = space.cell_bases[cell_id]
    nT, nF = space.n_cell, space.n_face
    R = build_reconstruction(space, cell_id)
    G = build_gradient_reconstruction(space, cell_id)
    S_list, stab = build_stabilization(space, cell_id, R=R)
    phi = cb.values[:, :nT]
    face_points, face_R, jump = [], [], []
    for i, f in enumerate(faces):
        fb = space.face_bases[f]
        phif = cb.eval(fb.quad.points)
        face_points.append(fb.quad.points)
        face_R.append(phif @ R)
        J = np.zeros((len(fb.quad.weights), len(dofs)))
        J[:, :nT] = -phif[:, :nT]
        J[:, _face_block(i, nT, nF)] = fb.values
        jump.append(J.T @ (fb.quad.weights[:, None] * J))
    return LocalOperators(
        cell_id=cell_id,
        faces=faces,
        normals=normals,
        dofs=dofs,
        R_matrix=R,
        G_matrix=G,
        S_matrices=S_list,
        face_mass=[space.face_bases[f].mass_matrix for f in faces],
        face_h=space.mesh.face_diameters[faces],
        stab_form=stab,
        quad_points=cb.quad.points,
        quad_weights=cb.quad.weights,
        cell_values=phi,
        R_values=cb.values @ R,
        G_values=np.stack([phi @ G[:nT], phi @ G[nT:]]),
        face_points=face_points,
        face_R_values=face_R,
        jump_mass=jump,
    )


def interpolate(space, v):
    """I_h^k v: cellwise and facewise L2 projections of the scalar function v."""
    cells = np.array([project_cell(b, v, space.k) for b in space.cell_bases])
    faces = np.array([project_face(b, v) for b in space.face_bases])
    return HybridVector(cells.reshape(space.mesh.num_cells, space.n_cell),
                        faces.reshape(space.mesh.num_faces, space.n_face))


def norms(space, vec, a=None):
    """(||v||_{a,h}, ||v||_{1,h}); `a` samples the diffusion coefficient (default 1)."""
    na2 = n12 = 0.0
    nT = space.n_cell
    for c, op in enumerate(space.ops):
        x = space.local(vec, c)
        aq = np.ones(len(op.quad_weights)) if a is None else np.asarray(a(op.quad_points), float)
        gv = op.G_values @ x  # (2, nq)
        na2 += float(op.quad_weights @ (aq * (gv**2).sum(0)))
        gT = np.einsum("qid,i->qd", space.cell_bases[c].grads[:, :nT], x[:nT])
        n12 += float(op.quad_weights @ (gT**2).sum(1))
        wts = np.ones(len(op.faces)) if a is None else op.face_weights(a)
        for wt, h, J in zip(wts, op.face_h, op.jump_mass):
            jj = float(x @ J @ x)
            na2 += wt / h * jj
            n12 += jj / h
    return np.sqrt(max(na2, 0.0)), np.sqrt(max(n12, 0.0))
