"""HHO scheme for -div(a grad u) + b.grad u + a0 u = p with u = 0 on the boundary.

Cell unknowns are always eliminated locally (static condensation); the global
system lives on interior-face unknowns only.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
from scipy.linalg import LinAlgError, lu_factor, lu_solve
from scipy.sparse.linalg import splu

from .hho_ops import HybridVector


class LinearSolveError(RuntimeError):
    pass


def _zero(points):
    return np.zeros(len(points))


def _one(points):
    return np.ones(len(points))


@dataclass
class LinearProblemData:
    """Coefficients are callables on (n, 2) point arrays; `b_vec` returns (n, 2)."""

    a: callable = _one
    b_vec: callable = None
    a0: callable = None
    p_rhs: callable = _zero
    alpha: float = None  # lower bound of a; inferred from samples when None

    def check(self, space):
        lo = min(float(np.min(self.a(op.quad_points))) for op in space.ops)
        if lo <= 0.0 or (self.alpha is not None and lo < self.alpha - 1e-12):
            raise ValueError(f"diffusion coefficient violates its lower bound (min sample {lo:.3e})")
        if self.a0 is not None:
            lo0 = min(float(np.min(self.a0(op.quad_points))) for op in space.ops)
            if lo0 < -1e-12:
                raise ValueError(f"reaction coefficient is negative (min sample {lo0:.3e})")
        return True


def diffusion_matrix(op, a_values, weights):
    """(a G u, G v)_T + s_T(u, v) for coefficient samples at the cell quadrature points."""
    wa = op.quad_weights * a_values
    A = np.einsum("dqi,q,dqj->ij", op.G_values, wa, op.G_values)
    return A + op.stabilization(weights)


def local_bilinear_form(space, cell_id, problem):
    """Local matrix of B_T and load vector (p, v_T)_T, cell block first."""
    op = space.ops[cell_id]
    nT = space.n_cell
    x, w = op.quad_points, op.quad_weights
    A = diffusion_matrix(op, problem.a(x), op.face_weights(problem.a))
    phi = op.cell_values
    if problem.b_vec is not None:
        cb = space.cell_bases[cell_id]
        gradR = np.einsum("qid,ij->dqj", cb.grads, op.R_matrix)
        b = problem.b_vec(x)
        bgrad = b[:, 0, None] * gradR[0] + b[:, 1, None] * gradR[1]
        A[:nT] += phi.T @ (w[:, None] * bgrad)
    if problem.a0 is not None:
        A[:nT, :nT] += phi.T @ ((w * problem.a0(x))[:, None] * phi)
    rhs = np.zeros(op.nloc)
    rhs[:nT] = phi.T @ (w * problem.p_rhs(x))
    return A, rhs


@dataclass(eq=False)
class CondensedSystem:
    space: object
    face_matrix: sps.csr_matrix
    face_rhs: np.ndarray
    interior_dofs: np.ndarray  # global face unknowns kept, in system order
    recovery: list = field(repr=False)  # per cell: (lu of A_TT, A_TF, b_T, face unknowns)
    fixed: np.ndarray = field(repr=False, default=None)  # prescribed boundary unknowns

    @property
    def dim(self):
        return self.face_matrix.shape[0]


def _face_positions(space):
    """Map from global unknown index to interior-face system index (-1 on the boundary)."""
    pos = -np.ones(space.ndof, dtype=np.int64)
    dofs = space.interior_face_dofs()
    pos[dofs] = np.arange(len(dofs))
    return pos, dofs


def assemble_and_condense(space, local_forms, boundary_values=None):
    """Eliminate cell unknowns cell by cell and assemble the interior-face Schur complement.

    `local_forms` is a sequence of (A_T, rhs_T) in local ordering. Boundary face
    unknowns are removed: they are zero (homogeneous Dirichlet condition) unless
    `boundary_values`, a HybridVector whose boundary-face blocks hold the data,
    is given.
    """
    pos, dofs = _face_positions(space)
    nT = space.n_cell
    fixed = np.zeros(space.ndof)
    if boundary_values is not None:
        bd = np.setdiff1d(np.arange(space.face_dof_offset(), space.ndof), dofs)
        fixed[bd] = boundary_values.flat()[bd]
    rows, cols, vals = [], [], []
    rhs = np.zeros(len(dofs))
    recovery = []
    for c, (A, b) in enumerate(local_forms):
        op = space.ops[c]
        try:
            lu = lu_factor(A[:nT, :nT], check_finite=True)
            if np.any(np.abs(np.diag(lu[0])) < 1e-14 * max(1.0, np.abs(A[:nT, :nT]).max())):
                raise LinAlgError("zero pivot")
        except (LinAlgError, ValueError) as exc:
            raise LinearSolveError(
                f"singular cell block in cell {c} (centroid {space.mesh.cell_centroids[c].tolist()})"
            ) from exc
        A_TF = A[:nT, nT:]
        A_FT = A[nT:, :nT]
        face_dofs = op.dofs[nT:]
        local_pos = pos[face_dofs]
        keep = local_pos >= 0
        schur = A[nT:, nT:] - A_FT @ lu_solve(lu, A_TF)
        g = b[nT:] - A_FT @ lu_solve(lu, b[:nT])
        if boundary_values is not None and not keep.all():
            g = g - schur[:, ~keep] @ fixed[face_dofs[~keep]]
        lp = local_pos[keep]
        rows.append(np.repeat(lp, len(lp)))
        cols.append(np.tile(lp, len(lp)))
        vals.append(schur[np.ix_(keep, keep)].ravel())
        np.add.at(rhs, lp, g[keep])
        recovery.append((lu, A_TF, b[:nT], face_dofs))
    n = len(dofs)
    if rows:
        mat = sps.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        ).tocsr()
    else:
        mat = sps.csr_matrix((n, n))
    return CondensedSystem(space, mat, rhs, dofs, recovery, fixed)


def _sparse_solve(mat, rhs, rtol=1e-12):
    if mat.shape[0] == 0:
        return np.zeros(0)
    try:
        lu = splu(mat.tocsc())
    except RuntimeError as exc:
        raise LinearSolveError(f"sparse factorization failed: {exc}") from exc
    x = lu.solve(rhs)
    bn = np.linalg.norm(rhs)
    if bn == 0.0:
        return x
    for _ in range(3):
        r = rhs - mat @ x
        if np.linalg.norm(r) <= rtol * bn:
            break
        x += lu.solve(r)
    if not np.all(np.isfinite(x)):
        raise LinearSolveError("sparse solve produced non-finite values")
    return x


def solve_linear(system):
    """Solve the condensed face system, then recover cell unknowns."""
    space = system.space
    faces = _sparse_solve(system.face_matrix, system.face_rhs)
    x = np.zeros(space.ndof) if system.fixed is None else system.fixed.copy()
    x[system.interior_dofs] = faces
    nT = space.n_cell
    for c, (lu, A_TF, b_T, face_dofs) in enumerate(system.recovery):
        x[c * nT : (c + 1) * nT] = lu_solve(lu, b_T - A_TF @ x[face_dofs])
    return HybridVector.from_flat(space, x)


def relative_residual(system, vec):
    faces = vec.flat()[system.interior_dofs]
    bn = np.linalg.norm(system.face_rhs)
    r = np.linalg.norm(system.face_matrix @ faces - system.face_rhs)
    return r / bn if bn > 0 else r


def assemble_full(space, local_forms):
    """Uncondensed global system on cell unknowns plus interior-face unknowns.

    Returns (matrix, rhs, kept) where `kept` lists the global unknowns retained.
    """
    kept = np.concatenate([np.arange(space.face_dof_offset()), space.interior_face_dofs()])
    pos = -np.ones(space.ndof, dtype=np.int64)
    pos[kept] = np.arange(len(kept))
    rows, cols, vals = [], [], []
    rhs = np.zeros(len(kept))
    for c, (A, b) in enumerate(local_forms):
        lp = pos[space.ops[c].dofs]
        keep = lp >= 0
        lk = lp[keep]
        rows.append(np.repeat(lk, len(lk)))
        cols.append(np.tile(lk, len(lk)))
        vals.append(A[np.ix_(keep, keep)].ravel())
        np.add.at(rhs, lk, b[keep])
    n = len(kept)
    mat = sps.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return mat, rhs, kept


def solve_full(space, local_forms):
    mat, rhs, kept = assemble_full(space, local_forms)
    x = np.zeros(space.ndof)
    x[kept] = _sparse_solve(mat, rhs)
    return HybridVector.from_flat(space, x)


def solve_problem(space, problem, boundary_values=None):
    problem.check(space)
    forms = [local_bilinear_form(space, c, problem) for c in range(space.mesh.num_cells)]
    return solve_linear(assemble_and_condense(space, forms, boundary_values))


def gradient_error(space, grad_u, vec):
    """(sum_T ||grad u - G_T^k v_T||_T^2)^(1/2) and ||grad u||, both by quadrature."""
    err2 = ref2 = 0.0
    for c, op in enumerate(space.ops):
        g = np.asarray(grad_u(op.quad_points), dtype=float)  # (nq, 2)
        gh = (op.G_values @ space.local(vec, c)).T
        err2 += float(op.quad_weights @ ((g - gh) ** 2).sum(1))
        ref2 += float(op.quad_weights @ (g**2).sum(1))
    return np.sqrt(err2), np.sqrt(ref2)


def energy_error(space, grad_u, vec):
    return gradient_error(space, grad_u, vec)[0]
