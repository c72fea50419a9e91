"""Run one convergence study and print the error table with per-level orders and fits.

Usage: python3 scripts/convergence_study.py CASE [--approach C] [--indicator discontinuous]
       [--grids 32 64 128] [--eta 1e-8] [--n-prop 2] [--kernel spline6]
"""
import argparse
import sys

from fluxvp.cases import get_case
from fluxvp.indicator import IndicatorConfig
from fluxvp.solver import SolveConfig
from fluxvp.verify import StudyConfig, run_convergence_study


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("case")
    p.add_argument("--approach", default="C")
    p.add_argument("--indicator", default="continuous")
    p.add_argument("--n-smear", type=float, default=1.0)
    p.add_argument("--grids", type=int, nargs="+")
    p.add_argument("--eta", type=float, default=1e-8)
    p.add_argument("--n-prop", type=int, default=2)
    p.add_argument("--kernel", default="spline6")
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()
    case = get_case(args.case)
    cfg = StudyConfig(approach=args.approach, indicator=IndicatorConfig(args.indicator, args.n_smear), eta=args.eta,
                      n_prop=args.n_prop, kernel=args.kernel, grids=tuple(args.grids or ()),
                      solver=SolveConfig(preconditioner="auto"))
    rep = run_convergence_study(case, cfg, jobs=args.jobs)
    print(f"{case.name}  approach {args.approach}  {args.indicator}  eta={args.eta:g}")
    print(f"{'N':>6s} {'h':>10s} {'E1':>12s} {'order':>6s} {'Einf':>12s} {'order':>6s} {'iters':>6s} {'residual':>9s}")
    for i, r in enumerate(rep.records):
        o1 = f"{rep.orders_e1[i - 1]:6.2f}" if i else " " * 6
        oi = f"{rep.orders_einf[i - 1]:6.2f}" if i else " " * 6
        print(f"{r.n:6d} {r.h:10.3e} {r.e1:12.5e} {o1} {r.einf:12.5e} {oi} {r.iterations:6d} {r.residual:9.2e}")
    for name, fit in (("E1", rep.fit_e1), ("Einf", rep.fit_einf)):
        if fit is not None:
            print(f"fit {name}: m = {fit.slope_m:.3f}, R2 = {fit.r_squared:.3f}")
    return 0 if all(r.converged for r in rep.records) else 1


if __name__ == "__main__":
    sys.exit(main())
