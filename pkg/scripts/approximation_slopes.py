#!/usr/bin/env python3
"""Observed slopes of ||v - R I v||, ||grad v - G I v|| and ||v - pi v|| for
v = sin(pi x) sin(pi y) on Cartesian meshes."""

import argparse

import numpy as np

from polyhho.checks import interpolation_errors
from polyhho.hho_ops import HHOSpace
from polyhho.mesh import FAMILIES, generate_mesh
from polyhho.poly import observed_orders
from polyhho.problems import get_solution


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="cartesian", choices=FAMILIES)
    ap.add_argument("--levels", type=int, nargs=2, default=[1, 4], metavar=("FIRST", "LAST"))
    args = ap.parse_args()
    sol = get_solution("sine")
    levels = range(args.levels[0], args.levels[1] + 1)
    print(f"{'k':>2s} {'R I v':>8s} {'G I v':>8s} {'pi v':>8s}   (final-pair slopes)")
    for k in (0, 1, 2):
        hs, errs = [], []
        for lvl in levels:
            sp = HHOSpace(generate_mesh(args.family, lvl), k)
            hs.append(sp.mesh.h)
            errs.append(interpolation_errors(sp, sol.u, sol.grad))
        errs = np.array(errs)
        slopes = [observed_orders(hs, errs[:, i])[-1] for i in range(3)]
        print(f"{k:2d} " + " ".join(f"{s:8.3f}" for s in slopes))


if __name__ == "__main__":
    main()
