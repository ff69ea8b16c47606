"""Manufactured solutions and the three registered test problems.

quasilinear     -div((1 + u) grad u) = f,  u = x(1-x)y(1-y)
nonselfadjoint  -div((1 + x) grad u) + (1, 1).grad u + u = p,  u = sin(pi x) sin(pi y)
poisson         -Laplace u = p,  u a polynomial of degree k + 1 (boundary data from u)
"""

from dataclasses import dataclass

import numpy as np

from .linear import LinearProblemData
from .quasilinear import QuasilinearProblemData

PROBLEMS = ("poisson", "nonselfadjoint", "quasilinear")


@dataclass(frozen=True)
class ManufacturedSolution:
    """u with hand-coded gradient and Laplacian, all acting on (n, 2) point arrays."""

    name: str
    u: callable
    grad: callable
    laplacian: callable
    vanishes_on_boundary: bool = True


def _bubble():
    def u(p):
        x, y = p[:, 0], p[:, 1]
        return x * (1 - x) * y * (1 - y)

    def grad(p):
        x, y = p[:, 0], p[:, 1]
        return np.column_stack([(1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)])

    def lap(p):
        x, y = p[:, 0], p[:, 1]
        return -2 * y * (1 - y) - 2 * x * (1 - x)

    return ManufacturedSolution("bubble", u, grad, lap)


def _sine():
    pi = np.pi

    def u(p):
        return np.sin(pi * p[:, 0]) * np.sin(pi * p[:, 1])

    def grad(p):
        x, y = p[:, 0], p[:, 1]
        return pi * np.column_stack(
            [np.cos(pi * x) * np.sin(pi * y), np.sin(pi * x) * np.cos(pi * y)]
        )

    def lap(p):
        return -2 * pi**2 * u(p)

    return ManufacturedSolution("sine", u, grad, lap)


def _zero():
    return ManufacturedSolution(
        "zero",
        lambda p: np.zeros(len(p)),
        lambda p: np.zeros((len(p), 2)),
        lambda p: np.zeros(len(p)),
    )


def polynomial_solution(degree):
    """u = s^n + t^n with s = (1 + x + 2y)/4, t = (2 - x + y)/3, n = degree >= 1."""
    n = degree
    ds, dt = np.array([0.25, 0.5]), np.array([-1.0 / 3.0, 1.0 / 3.0])

    def st(p):
        return (1 + p[:, 0] + 2 * p[:, 1]) / 4.0, (2 - p[:, 0] + p[:, 1]) / 3.0

    def u(p):
        s, t = st(p)
        return s**n + t**n

    def grad(p):
        s, t = st(p)
        return n * (s[:, None] ** (n - 1) * ds + t[:, None] ** (n - 1) * dt)

    def lap(p):
        if n < 2:
            return np.zeros(len(p))
        s, t = st(p)
        return n * (n - 1) * (s ** (n - 2) * (ds @ ds) + t ** (n - 2) * (dt @ dt))

    return ManufacturedSolution(f"poly{n}", u, grad, lap, vanishes_on_boundary=False)


SOLUTIONS = {"bubble": _bubble, "sine": _sine, "zero": _zero}


def get_solution(name):
    if name in SOLUTIONS:
        return SOLUTIONS[name]()
    if name.startswith("poly") and name[4:].isdigit():
        return polynomial_solution(int(name[4:]))
    raise KeyError(f"unknown manufactured solution {name!r}")


def manufactured_rhs(kind, solution, coefficients=None):
    """Load function such that `solution` solves the problem of the given kind.

    coefficients:
      quasilinear     a(x, t), a_u(x, t), optional a_x(x, t) -> (n, 2)
      nonselfadjoint  a(x), grad_a(x) -> (n, 2), b(x) -> (n, 2), a0(x)
      poisson         none
    """
    coefficients = coefficients or {}
    sol = solution
    if kind == "poisson":
        return lambda p: -sol.laplacian(p)
    if kind == "quasilinear":
        a, a_u = coefficients["a"], coefficients["a_u"]
        a_x = coefficients.get("a_x")

        def f(p):
            u, g = sol.u(p), sol.grad(p)
            out = -a(p, u) * sol.laplacian(p) - a_u(p, u) * (g**2).sum(1)
            if a_x is not None:
                out -= (a_x(p, u) * g).sum(1)
            return out

        return f
    if kind == "nonselfadjoint":
        a, grad_a = coefficients["a"], coefficients["grad_a"]
        b, a0 = coefficients.get("b"), coefficients.get("a0")

        def p_rhs(p):
            g = sol.grad(p)
            out = -a(p) * sol.laplacian(p) - (grad_a(p) * g).sum(1)
            if b is not None:
                out += (b(p) * g).sum(1)
            if a0 is not None:
                out += a0(p) * sol.u(p)
            return out

        return p_rhs
    raise KeyError(f"unknown problem kind {kind!r}")


def quasilinear_problem(solution="bubble", alpha=0.5, M=1.5):
    """a(u) = 1 + u with f manufactured from `solution`.

    a is unbounded in u, so [alpha, M] is an admissible range that the
    iterates must stay in rather than a global bound.
    """
    sol = get_solution(solution) if isinstance(solution, str) else solution

    def a(x, t):
        return 1.0 + t

    def a_u(x, t):
        return np.ones_like(t)

    f = manufactured_rhs("quasilinear", sol, {"a": a, "a_u": a_u})
    return QuasilinearProblemData(a, a_u, f, alpha, M, sol.u, sol.grad)


def nonselfadjoint_problem(solution="sine"):
    sol = get_solution(solution) if isinstance(solution, str) else solution
    coeffs = {
        "a": lambda p: 1.0 + p[:, 0],
        "grad_a": lambda p: np.column_stack([np.ones(len(p)), np.zeros(len(p))]),
        "b": lambda p: np.ones((len(p), 2)),
        "a0": lambda p: np.ones(len(p)),
    }
    prob = LinearProblemData(
        a=coeffs["a"],
        b_vec=coeffs["b"],
        a0=coeffs["a0"],
        p_rhs=manufactured_rhs("nonselfadjoint", sol, coeffs),
        alpha=1.0,
    )
    return prob, sol


def poisson_problem(k):
    """Unit-coefficient Poisson problem with a polynomial solution of degree k + 1."""
    sol = polynomial_solution(k + 1)
    return LinearProblemData(p_rhs=manufactured_rhs("poisson", sol), alpha=1.0), sol
