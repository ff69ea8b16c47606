"""Convergence studies on manufactured solutions and their CSV / plot-data output."""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .hho_ops import HHOSpace, interpolate
from .linear import gradient_error, solve_problem
from .mesh import FAMILIES, generate_mesh, read_mesh
from .problems import PROBLEMS, nonselfadjoint_problem, poisson_problem, quasilinear_problem
from .quasilinear import fixed_point_solve

log = logging.getLogger(__name__)

CSV_COLUMNS = ("family", "k", "level", "h", "ndof", "error", "rate")


class StudyError(RuntimeError):
    pass


@dataclass
class StudyConfig:
    problem: str = "quasilinear"
    family: str = "cartesian"
    degrees: tuple = (0, 1, 2)
    levels: tuple = (0, 1, 2, 3)
    tol: float = 1e-10
    out: str = None
    seed: int = 0
    max_iter: int = 25
    weight_mode: str = "iterate"
    mesh_file: str = None

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}; expected one of {PROBLEMS}")
        if self.mesh_file is None and self.family not in FAMILIES:
            raise ValueError(f"unknown mesh family {self.family!r}; expected one of {FAMILIES}")
        if not self.degrees or not set(self.degrees) <= {0, 1, 2, 3}:
            raise ValueError("degrees must be a nonempty subset of {0, 1, 2, 3}")
        lv = list(self.levels)
        if not lv or lv != sorted(set(lv)) or lv[0] < 0:
            raise ValueError("levels must be nonempty, ascending and non-negative")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        return self


@dataclass
class RateRow:
    family: str
    k: int
    level: int
    h: float
    ndof: int
    error: float
    rate: float = None
    iterations: int = None
    converged: bool = True


@dataclass
class RateTable:
    rows: list = field(default_factory=list)

    def add(self, row):
        prev = [r for r in self.rows if r.family == row.family and r.k == row.k]
        if prev:
            row.rate = rate(prev[-1].h, prev[-1].error, row.h, row.error)
        self.rows.append(row)
        return row

    def group(self, family, k):
        return [r for r in self.rows if r.family == family and r.k == k]

    def final_rate(self, family, k):
        return self.group(family, k)[-1].rate

    @property
    def all_converged(self):
        return all(r.converged for r in self.rows)


def rate(h_prev, e_prev, h, e):
    """log(e / e_prev) / log(h / h_prev)."""
    if e <= 0.0 or e_prev <= 0.0:
        return math.nan
    return math.log(e / e_prev) / math.log(h / h_prev)


def solve_case(problem, mesh, k, tol=1e-10, max_iter=25, weight_mode="iterate"):
    """Solve one registered problem on one mesh; returns (space, solution, error, report)."""
    space = HHOSpace(mesh, k)
    report = None
    if problem == "quasilinear":
        prob = quasilinear_problem()
        uh, report = fixed_point_solve(space, prob, tol=tol, max_iter=max_iter, weight_mode=weight_mode)
        grad = prob.grad_u_exact
    elif problem == "nonselfadjoint":
        prob, sol = nonselfadjoint_problem()
        uh = solve_problem(space, prob)
        grad = sol.grad
    elif problem == "poisson":
        prob, sol = poisson_problem(k)
        uh = solve_problem(space, prob, boundary_values=interpolate(space, sol.u))
        grad = sol.grad
    else:
        raise ValueError(f"unknown problem {problem!r}")
    err, ref = gradient_error(space, grad, uh)
    return space, uh, err / ref, report


def run_study(config):
    """Relative reconstructed-gradient errors and rates for every (k, level) of the config."""
    config.validate()
    table = RateTable()
    family = "file" if config.mesh_file else config.family
    levels = [0] if config.mesh_file else list(config.levels)
    for k in config.degrees:
        for level in levels:
            try:
                mesh = read_mesh(config.mesh_file) if config.mesh_file else generate_mesh(family, level)
                space, _, err, report = solve_case(
                    config.problem, mesh, k, config.tol, config.max_iter, config.weight_mode
                )
            except Exception as exc:
                raise StudyError(f"{config.problem} on {family} k={k} level={level}: {exc}") from exc
            ndof = space.n_face * len(mesh.interior_faces)
            row = table.add(
                RateRow(
                    family,
                    k,
                    level,
                    mesh.h,
                    ndof,
                    err,
                    iterations=report.iterations if report else None,
                    converged=report.converged if report else True,
                )
            )
            log.info(
                "%s k=%d level=%d h=%.4e ndof=%d error=%.6e rate=%s",
                family, k, level, row.h, ndof, err, "" if row.rate is None else f"{row.rate:.3f}",
            )
    return table


def _fmt(x):
    return "" if x is None else repr(float(x))


def emit_csv(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in table.rows:
            w.writerow([r.family, r.k, r.level, _fmt(r.h), r.ndof, _fmt(r.error), _fmt(r.rate)])


def read_csv(path):
    table = RateTable()
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            table.rows.append(
                RateRow(
                    rec["family"],
                    int(rec["k"]),
                    int(rec["level"]),
                    float(rec["h"]),
                    int(rec["ndof"]),
                    float(rec["error"]),
                    float(rec["rate"]) if rec["rate"] else None,
                )
            )
    return table


def emit_plotdata(table, path):
    """One (log10 h, log10 error) series per (family, k), as JSON."""
    series = []
    seen = []
    for r in table.rows:
        if (r.family, r.k) not in seen:
            seen.append((r.family, r.k))
    for family, k in seen:
        g = table.group(family, k)
        series.append(
            {
                "family": family,
                "k": k,
                "log10_h": [float(np.log10(r.h)) for r in g],
                "log10_error": [float(np.log10(r.error)) if r.error > 0 else None for r in g],
            }
        )
    Path(path).write_text(json.dumps({"series": series}, indent=1) + "\n")
