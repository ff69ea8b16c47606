"""Property measurements behind the `check` command.

Each measurement compares the discrete operators against an independent
route (direct projection, uncondensed assembly, finite differences).
"""

from dataclasses import dataclass

import numpy as np

from .hho_ops import HHOSpace, HybridVector, interpolate
from .linear import (
    assemble_and_condense,
    local_bilinear_form,
    solve_full,
    solve_linear,
    solve_problem,
)
from .mesh import FAMILIES, generate_mesh
from .poly import monomial_exponents, project_cell, project_face
from .problems import nonselfadjoint_problem, poisson_problem, quasilinear_problem
from .quasilinear import (
    QuasilinearProblemData,
    linearized_form,
    nonlinear_form,
    stabilization_weights,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def random_polynomial(degree, rng, center=(0.5, 0.5), scale=1.0):
    """Random polynomial of total degree <= `degree` and its gradient, as callables."""
    ex = monomial_exponents(degree)
    co = rng.standard_normal(len(ex))
    center = np.asarray(center, dtype=float)

    def q(p):
        s = (p - center) / scale
        return sum(c * s[:, 0] ** a * s[:, 1] ** b for c, (a, b) in zip(co, ex))

    def grad(p):
        s = (p - center) / scale
        gx = sum(c * a * s[:, 0] ** max(a - 1, 0) * s[:, 1] ** b for c, (a, b) in zip(co, ex))
        gy = sum(c * b * s[:, 0] ** a * s[:, 1] ** max(b - 1, 0) for c, (a, b) in zip(co, ex))
        return np.column_stack([gx, gy]) / scale

    return q, grad


def local_interpolate(space, c, f):
    """I_T^k f for a single cell, in local ordering."""
    op = space.ops[c]
    parts = [project_cell(space.cell_bases[c], f, space.k)]
    parts += [project_face(space.face_bases[fid], f) for fid in op.faces]
    return np.concatenate(parts)


def _rms(op, values):
    return np.sqrt(op.quad_weights @ values**2 / op.quad_weights.sum())


def exactness_errors(space, c, rng):
    """Scaled defects of R I q = q, S_F I q = 0 (q in P^{k+1}) and G I v = pi(grad v) (v in P^{k+3}).

    Errors are RMS values over the cell relative to the size of the reference
    quantity, so they are independent of h_T.
    """
    op = space.ops[c]
    cb = space.cell_bases[c]
    k = space.k
    q, _ = random_polynomial(k + 1, rng, cb.center, cb.scale)
    x = local_interpolate(space, c, q)
    qv = q(op.quad_points)
    r_err = _rms(op, op.R_values @ x - qv) / max(_rms(op, qv), 1e-300)
    s_err = 0.0
    for S, M, p in zip(op.S_matrices, op.face_mass, op.face_points):
        sf = S @ x
        # L2(F) norm of S_F I q relative to the RMS size of q
        s_err = max(s_err, np.sqrt(sf @ M @ sf / M[0, 0]) / max(_rms(op, qv), 1e-300))
    v, gv = random_polynomial(k + 3, rng, cb.center, cb.scale)
    y = local_interpolate(space, c, v)
    pg = np.concatenate(
        [project_cell(cb, lambda p: gv(p)[:, 0], k), project_cell(cb, lambda p: gv(p)[:, 1], k)]
    )
    nT = space.n_cell
    gh = op.G_values @ y
    ref = np.stack([op.cell_values @ pg[:nT], op.cell_values @ pg[nT:]])
    size = max(np.sqrt(_rms(op, ref[0]) ** 2 + _rms(op, ref[1]) ** 2), 1e-300)
    g_err = np.sqrt(_rms(op, gh[0] - ref[0]) ** 2 + _rms(op, gh[1] - ref[1]) ** 2) / size
    return r_err, s_err, g_err


def poisson_exactness(mesh, k):
    """max |u_h - I_h u| over all unknowns for a polynomial solution of degree k + 1."""
    space = HHOSpace(mesh, k)
    prob, sol = poisson_problem(k)
    ih = interpolate(space, sol.u)
    uh = solve_problem(space, prob, boundary_values=ih)
    return float(np.abs(uh.flat() - ih.flat()).max() / max(np.abs(ih.flat()).max(), 1.0))


def condensation_gap(space, problem):
    forms = [local_bilinear_form(space, c, problem) for c in range(space.mesh.num_cells)]
    cond = solve_linear(assemble_and_condense(space, forms)).flat()
    full = solve_full(space, forms).flat()
    return float(np.linalg.norm(cond - full) / np.linalg.norm(full))


def random_hybrid(space, rng, amplitude=1.0, homogeneous=False):
    vec = HybridVector.from_flat(space, amplitude * rng.standard_normal(space.ndof))
    if homogeneous:
        vec.face_blocks[space.mesh.boundary_flags] = 0.0
    return vec


def gateaux_errors(space, problem, w, psi, v, eps_list):
    """|central difference of w -> N_h(w; w, v) along psi - N~lin(w; psi, v)|, relative.

    Stabilization weights are frozen at their value for `w`.
    """
    weights = stabilization_weights(space, problem, w)
    lin = linearized_form(space, problem, w, psi, v, weights)
    scale = max(abs(lin), abs(nonlinear_form(space, problem, w, w, v, weights)), 1e-300)
    out = []
    for eps in eps_list:
        fp = nonlinear_form(space, problem, w + eps * psi, w + eps * psi, v, weights)
        fm = nonlinear_form(space, problem, w - eps * psi, w - eps * psi, v, weights)
        out.append(abs((fp - fm) / (2 * eps) - lin) / scale)
    return np.array(out)


def smooth_test_coefficient():
    """a(t) = 1.5 + sin(t)/2: nonpolynomial, so finite differences show their truncation error."""
    return QuasilinearProblemData(
        a=lambda x, t: 1.5 + 0.5 * np.sin(t),
        a_u=lambda x, t: 0.5 * np.cos(t),
        f_rhs=lambda p: np.ones(len(p)),
        alpha=1.0,
        M=2.0,
    )


def run_checks(seed=0, families=FAMILIES, degrees=(0, 1, 2)):
    rng = np.random.default_rng(seed)
    results = []

    worst = [0.0, 0.0, 0.0]
    for fam in families:
        mesh = generate_mesh(fam, 1)
        for k in degrees:
            space = HHOSpace(mesh, k)
            cells = rng.choice(mesh.num_cells, size=min(5, mesh.num_cells), replace=False)
            for c in cells:
                worst = np.maximum(worst, exactness_errors(space, c, rng))
    results.append(
        CheckResult(
            "polynomial exactness (R, S_F, G)",
            bool(max(worst) <= 1e-10),
            "max scaled defects R=%.1e S=%.1e G=%.1e (tol 1e-10)" % tuple(worst),
        )
    )

    perr = max(poisson_exactness(generate_mesh(f, 1), k) for f in families for k in degrees)
    results.append(
        CheckResult("Poisson polynomial reproduction", perr <= 1e-9, f"max error {perr:.1e} (tol 1e-9)")
    )

    prob, _ = nonselfadjoint_problem()
    gap = max(
        condensation_gap(HHOSpace(generate_mesh(f, 1), k), prob) for f in families for k in (0, 1)
    )
    results.append(
        CheckResult("condensed vs uncondensed solve", gap <= 1e-9, f"max relative gap {gap:.1e} (tol 1e-9)")
    )

    qprob = quasilinear_problem()
    qprob.alpha, qprob.M = 0.0, np.inf
    worst_fd = 0.0
    for k in degrees:
        space = HHOSpace(generate_mesh("cartesian", 0), k)
        w, psi, v = (random_hybrid(space, rng, 0.05) for _ in range(3))
        worst_fd = max(worst_fd, float(gateaux_errors(space, qprob, w, psi, v, [1e-4, 1e-5]).max()))
    results.append(
        CheckResult(
            "linearization vs finite differences",
            worst_fd <= 1e-7,
            f"max relative defect {worst_fd:.1e} at eps in {{1e-4, 1e-5}}",
        )
    )
    return results


def interpolation_errors(space, v, grad_v):
    """Global L2 errors of R_h I_h v, G_h I_h v (against grad v) and of pi_h^k v."""
    iv = interpolate(space, v)
    r2 = g2 = p2 = 0.0
    for c, op in enumerate(space.ops):
        x, w = op.quad_points, op.quad_weights
        loc = space.local(iv, c)
        vq = v(x)
        r2 += float(w @ (vq - op.R_values @ loc) ** 2)
        g2 += float(w @ ((grad_v(x).T - op.G_values @ loc) ** 2).sum(0))
        p2 += float(w @ (vq - op.cell_values @ loc[: space.n_cell]) ** 2)
    return np.sqrt(r2), np.sqrt(g2), np.sqrt(p2)
