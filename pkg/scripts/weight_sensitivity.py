#!/usr/bin/env python3
"""Compare stabilization weights taken from the current iterate with weights
frozen at the coefficient's upper bound: final rates and iteration counts."""

import argparse

from polyhho.mesh import FAMILIES
from polyhho.study import StudyConfig, run_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", nargs="+", default=list(FAMILIES), choices=FAMILIES)
    ap.add_argument("--max-level", type=int, default=3)
    args = ap.parse_args()
    print(f"{'family':10s} {'k':>2s} {'iterate':>8s} {'bound':>8s} {'its':>7s}")
    for fam in args.families:
        tables = {
            mode: run_study(StudyConfig(problem="quasilinear", family=fam,
                                        levels=tuple(range(args.max_level + 1)), weight_mode=mode))
            for mode in ("iterate", "bound")
        }
        for k in (0, 1, 2):
            its = "/".join(str(max(r.iterations for r in t.group(fam, k))) for t in tables.values())
            print(f"{fam:10s} {k:2d} {tables['iterate'].final_rate(fam, k):8.3f} "
                  f"{tables['bound'].final_rate(fam, k):8.3f} {its:>7s}")


if __name__ == "__main__":
    main()
