"""Compare computed errors with the published tables shipped in fluxvp/data.

For each series given (default: the ones with a constant-flux approach), solve
the grids that fit the desk-scale budget and print computed vs published
errors side by side.

Usage: python3 scripts/compare_reference.py [SERIES ...] [--max-2d 256] [--max-3d 64]
"""
import argparse
import sys

import numpy as np

from fluxvp.cases import get_case
from fluxvp.indicator import IndicatorConfig
from fluxvp.solver import SolveConfig
from fluxvp.verify import StudyConfig, load_reference_tables, solve_case

DEFAULT = ("annulus-neumann/B/continuous", "annulus-robin/B/continuous", "sphere-out/B/continuous",
           "circle-neumann/D-spline6/continuous")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("series", nargs="*", default=DEFAULT)
    p.add_argument("--max-2d", type=int, default=256)
    p.add_argument("--max-3d", type=int, default=64)
    args = p.parse_args()
    tables = {(s.series, s.norm): s for s in load_reference_tables()}
    for name in args.series:
        case_name, approach, kind = name.split("/")
        kernel = "spline6"
        if approach.startswith("D-"):
            approach, kernel = "D", approach[2:]
        case = get_case(case_name)
        cap = args.max_3d if case.dim == 3 else args.max_2d
        ref1, refi = tables[(name, "E1")], tables[(name, "Einf")]
        cfg = StudyConfig(approach=approach, indicator=IndicatorConfig(kind), kernel=kernel,
                          solver=SolveConfig(preconditioner="auto"))
        print(name)
        print(f"{'N':>6s} {'E1':>12s} {'E1 pub':>12s} {'ratio':>6s} {'Einf':>12s} {'Einf pub':>12s} {'ratio':>6s}")
        for k, n in enumerate(ref1.n):
            if n > cap:
                continue
            rec = solve_case(case, int(n), cfg).record
            e1p, eip = ref1.error_used[k], refi.error_used[np.flatnonzero(refi.n == n)[0]]
            print(f"{n:6d} {rec.e1:12.5e} {e1p:12.5e} {rec.e1 / e1p:6.2f} {rec.einf:12.5e} {eip:12.5e} "
                  f"{rec.einf / eip:6.2f}")
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
