"""HHO scheme for -div(a(x, u) grad u) = f with u = 0 on the boundary, and its
Newton-type linearization.

Stabilization weights a_TF^inf depend on the solution. Every form below takes
an optional per-cell list of weights; when omitted they are computed from the
linearization point `w`. Callers that need w-independent weights (finite
difference checks, the iteration below) pass them explicitly.
"""

from dataclasses import dataclass, field

import numpy as np

from .linear import (
    LinearProblemData,
    assemble_and_condense,
    diffusion_matrix,
    gradient_error,
    local_bilinear_form,
    solve_linear,
)


class CoefficientBoundError(ValueError):
    pass


@dataclass
class QuasilinearProblemData:
    """a(x, t) and its t-derivative a_u(x, t) act on (n, 2) points and (n,) values."""

    a: callable
    a_u: callable
    f_rhs: callable
    alpha: float = 0.0
    M: float = np.inf
    u_exact: callable = None
    grad_u_exact: callable = None

    def sample(self, x, t):
        vals = np.asarray(self.a(x, t), dtype=float)
        if vals.min() < self.alpha - 1e-12 or vals.max() > self.M + 1e-12:
            raise CoefficientBoundError(
                f"a(x, u) sampled in [{vals.min():.6g}, {vals.max():.6g}], "
                f"outside the admissible range [{self.alpha}, {self.M}]"
            )
        return vals


@dataclass
class IterationReport:
    iterations: int = 0
    increments: list = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    errors: dict = field(default_factory=dict)

    def strictly_decreasing(self):
        inc = self.increments
        return all(b < a for a, b in zip(inc, inc[1:]))


def stabilization_weights(space, problem, w, mode="iterate"):
    """Per-cell arrays of a_TF^inf.

    mode "iterate": max over face quadrature points of a(x, R_T w(x)).
    mode "bound":   the upper bound M of the coefficient (frozen).
    """
    if mode == "bound":
        if not np.isfinite(problem.M):
            raise ValueError("mode 'bound' needs a finite upper bound M")
        return [np.full(len(op.faces), float(problem.M)) for op in space.ops]
    if mode != "iterate":
        raise ValueError(f"unknown stabilization weight mode {mode!r}")
    out = []
    for c, op in enumerate(space.ops):
        x = space.local(w, c)
        out.append(
            np.array(
                [
                    np.abs(problem.sample(p, Rf @ x)).max()
                    for p, Rf in zip(op.face_points, op.face_R_values)
                ]
            )
        )
    return out


def local_matrices(op, problem, w_loc, weights):
    """Matrices of N_h(w; ., .) and of the discrete linearization around w on one cell.

    Rows index the test function v, columns the trial function.
    """
    x = op.quad_points
    r = op.R_values @ w_loc
    a_vals = problem.sample(x, r)
    A_N = diffusion_matrix(op, a_vals, weights)
    gw = op.G_values @ w_loc  # (2, nq)
    coef = op.quad_weights * np.asarray(problem.a_u(x, r), dtype=float)
    # sum_q a_u(Rw) (Gw . Gv_i) (R psi_j)
    Gv_dot_gw = np.einsum("dqi,dq->qi", op.G_values, gw)
    A_lin = A_N + Gv_dot_gw.T @ (coef[:, None] * op.R_values)
    return A_N, A_lin


def _bilinear(space, problem, w, u, v, weights, which):
    if weights is None:
        weights = stabilization_weights(space, problem, w)
    total = 0.0
    for c, op in enumerate(space.ops):
        mats = local_matrices(op, problem, space.local(w, c), weights[c])
        A = mats[0] if which == "N" else mats[1]
        total += space.local(v, c) @ A @ space.local(u, c)
    return float(total)


def nonlinear_form(space, problem, w, u, v, weights=None):
    """N_h(w; u, v) = sum_T (a(R_T w) G u, G v)_T + s_h(u, v)."""
    return _bilinear(space, problem, w, u, v, weights, "N")


def linearized_form(space, problem, w, psi, v, weights=None):
    """N~lin_h(w; psi, v): N_h(w; psi, v) + sum_T (a_u(R_T w) R_T psi G w, G v)_T."""
    return _bilinear(space, problem, w, psi, v, weights, "lin")


def exact_linearized_form(space, problem, u, grad_u, psi, v, weights=None):
    """Linearization around a supplied exact solution (analysis device, test use only).

    sum_T (a(u) G psi, G v)_T + (a_u(u) R_T psi grad u, G v)_T + s_h(psi, v).
    Stabilization weights default to max a(x, u(x)) over each face.
    """
    total = 0.0
    for c, op in enumerate(space.ops):
        x = op.quad_points
        uq = u(x)
        wa = op.quad_weights * problem.a(x, uq)
        A = np.einsum("dqi,q,dqj->ij", op.G_values, wa, op.G_values)
        g = np.asarray(grad_u(x), dtype=float).T  # (2, nq)
        coef = op.quad_weights * problem.a_u(x, uq)
        Gv_dot_g = np.einsum("dqi,dq->qi", op.G_values, g)
        A += Gv_dot_g.T @ (coef[:, None] * op.R_values)
        wts = (
            weights[c]
            if weights is not None
            else np.array([problem.a(p, u(p)).max() for p in op.face_points])
        )
        A += op.stabilization(wts)
        total += space.local(v, c) @ A @ space.local(psi, c)
    return float(total)


def load_vectors(space, f):
    out = []
    for op in space.ops:
        b = np.zeros(op.nloc)
        b[: space.n_cell] = op.cell_values.T @ (op.quad_weights * f(op.quad_points))
        out.append(b)
    return out


def gradient_norm(space, vec):
    """||G_h^k v|| over the domain."""
    total = 0.0
    for c, op in enumerate(space.ops):
        g = op.G_values @ space.local(vec, c)
        total += float(op.quad_weights @ (g**2).sum(0))
    return np.sqrt(total)


def poisson_initial_guess(space, f):
    """Discrete solution of -Laplace u = f (unit coefficient)."""
    prob = LinearProblemData(p_rhs=f)
    forms = [local_bilinear_form(space, c, prob) for c in range(space.mesh.num_cells)]
    return solve_linear(assemble_and_condense(space, forms))


def fixed_point_solve(
    space,
    problem,
    tol=1e-10,
    max_iter=25,
    weight_mode="iterate",
    initial=None,
    divergence_threshold=1e3,
):
    """Iterate N~lin(u^n; u^{n+1}, v) = N~lin(u^n; u^n, v) - N_h(u^n; u^n, v) + l(v).

    Stops when ||G(u^{n+1} - u^n)|| / ||G u^{n+1}|| <= tol. The stabilization
    weights of step n come from u^n and enter both sides identically.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    loads = load_vectors(space, problem.f_rhs)
    u = poisson_initial_guess(space, problem.f_rhs) if initial is None else initial.copy()
    report = IterationReport()
    for _ in range(max_iter):
        weights = stabilization_weights(space, problem, u, weight_mode)
        forms = []
        for c, op in enumerate(space.ops):
            x = space.local(u, c)
            A_N, A_lin = local_matrices(op, problem, x, weights[c])
            forms.append((A_lin, (A_lin - A_N) @ x + loads[c]))
        new = solve_linear(assemble_and_condense(space, forms))
        report.iterations += 1
        num = gradient_norm(space, new - u)
        den = gradient_norm(space, new)
        inc = num / den if den > 0.0 else num
        report.increments.append(inc)
        u = new
        if inc <= tol:
            report.converged = True
            break
        if inc > divergence_threshold or not np.isfinite(inc):
            report.diverged = True
            break
    if problem.grad_u_exact is not None:
        err, ref = gradient_error(space, problem.grad_u_exact, u)
        report.errors = {"gradient_abs": err}
        if ref > 0.0:
            report.errors["gradient_rel"] = err / ref
    return u, report


def reconstructed_gradient_error(space, grad_u, vec):
    """Absolute and relative ||grad u - G_h^k v||."""
    err, ref = gradient_error(space, grad_u, vec)
    if ref == 0.0:
        raise ValueError("exact gradient has zero norm; relative error undefined")
    return err, err / ref
