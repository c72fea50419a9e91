"""Command line entry point: ``fluxvp run | list | paper-suite``.

Run configurations are flat ``key = value`` files; ``#`` starts a comment::

    case = annulus-neumann
    approach = B
    indicator = continuous
    grids = 32, 64, 128
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .cases import CASES, get_case
from .forcing import APPROACHES, KERNELS
from .indicator import IndicatorConfig
from .solver import PRECISIONS, PRECONDITIONERS, SolveConfig, SolverError
from .verify import StudyConfig, run_convergence_study

log = logging.getLogger("fluxvp")

RESULTS_HEADER = ["case", "approach", "indicator", "n_smear", "n_prop", "eta", "N", "h", "e1", "einf",
                  "order_e1", "order_einf", "iterations", "residual", "wall_ms"]
FIT_HEADER = ["case", "approach", "indicator", "norm", "slope_m", "r_squared"]
SUMMARY_HEADER = ["criterion", "title", "passed", "measured", "bound"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    case: str = "annulus-neumann"
    approach: str = "C"
    indicator: str = "continuous"
    n_smear: float = 1.0
    n_prop: int = 2
    kernel: str = "spline6"
    eta: float = 1e-8
    grids: tuple = ()
    rel_tol: float = 1e-12
    restart: int = 50
    max_outer: int = 200
    preconditioner: str = "auto"
    precision: str = "auto"
    norm_mode: str = "integral"
    out: str = "out"
    emit_fields: bool = False
    timing: bool = True  # false writes wall_ms = 0 so reruns are byte-identical
    jobs: int = 1

    def validate(self):
        """Check every enumeration before anything is allocated."""
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; run 'fluxvp list' for the catalog")
        if self.approach not in APPROACHES:
            raise ConfigError(f"unknown approach {self.approach!r}; expected one of {', '.join(APPROACHES)}")
        case = CASES[self.case]
        if self.approach not in case.approaches:
            raise ConfigError(f"approach {self.approach} is not available for {self.case} "
                              f"(supported: {', '.join(case.approaches)})")
        if self.kernel not in KERNELS:
            raise ConfigError(f"unknown kernel {self.kernel!r}; expected one of {', '.join(KERNELS)}")
        if self.preconditioner not in PRECONDITIONERS:
            raise ConfigError(f"unknown preconditioner {self.preconditioner!r}")
        if self.precision not in PRECISIONS:
            raise ConfigError(f"unknown precision {self.precision!r}")
        if self.norm_mode not in ("integral", "mean"):
            raise ConfigError(f"unknown norm_mode {self.norm_mode!r}")
        if any(n < 2 for n in self.grids):
            raise ConfigError("grid sizes must be at least 2")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        try:
            self.study_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def study_config(self) -> StudyConfig:
        return StudyConfig(
            approach=self.approach, indicator=IndicatorConfig(self.indicator, self.n_smear), eta=self.eta,
            n_prop=self.n_prop, kernel=self.kernel, grids=tuple(self.grids), norm_mode=self.norm_mode,
            solver=SolveConfig(self.rel_tol, self.restart, self.max_outer, self.preconditioner, self.precision))


def _to_bool(v: str) -> bool:
    v = v.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


_CASTS = {"n_smear": float, "n_prop": int, "restart": int, "max_outer": int, "jobs": int, "eta": float,
          "rel_tol": float, "emit_fields": _to_bool, "timing": _to_bool,
          "grids": lambda v: tuple(int(x) for x in v.replace(",", " ").split())}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse flat ``key = value`` lines into a ``RunConfig``."""
    cfg = replace(base) if base is not None else RunConfig()
    known = set(RunConfig.__dataclass_fields__)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            setattr(cfg, key, _CASTS.get(key, str)(value))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return cfg


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _finite_row(row) -> bool:
    return all(math.isfinite(v) for v in row if isinstance(v, (float, np.floating)))


def write_study(report, cfg: RunConfig, out: Path) -> bool:
    """Write results.csv and fit.csv; returns False when any number is not finite."""
    out.mkdir(parents=True, exist_ok=True)
    finite = True
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for i, r in enumerate(report.records):
            o1 = report.orders_e1[i - 1] if i else ""
            oi = report.orders_einf[i - 1] if i else ""
            row = [report.case, cfg.approach, cfg.indicator, cfg.n_smear, cfg.n_prop, float(cfg.eta), r.n, r.h,
                   r.e1, r.einf, o1, oi, r.iterations, r.residual, r.wall_ms if cfg.timing else 0.0]
            finite &= _finite_row(row)
            w.writerow([_fmt(v) for v in row])
    with open(out / "fit.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIT_HEADER)
        for norm, fit in (("E1", report.fit_e1), ("Einf", report.fit_einf)):
            if fit is None:
                continue
            row = [report.case, cfg.approach, cfg.indicator, norm, fit.slope_m, fit.r_squared]
            finite &= _finite_row(row)
            w.writerow([_fmt(v) for v in row])
    return finite


def write_fields(solution, path: Path):
    """One row per cell: coordinates, q, q_exact, phi, chi."""
    g = solution.grid
    axes = "xyz"[: g.dim]
    cols = [g.cell_centers[..., a].ravel() for a in range(g.dim)]
    cols += [np.ravel(solution.q), np.ravel(solution.q_exact), np.ravel(solution.phi), np.ravel(solution.chi)]
    np.savetxt(path, np.column_stack(cols), fmt="%.17g", header=" ".join(list(axes) + ["q", "q_exact", "phi", "chi"]),
               comments="")


def cmd_run(cfg: RunConfig) -> int:
    cfg.validate()
    case = get_case(cfg.case)
    out = Path(cfg.out)
    try:
        report = run_convergence_study(case, cfg.study_config(), keep_solutions=cfg.emit_fields, jobs=cfg.jobs)
    except SolverError as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    finite = write_study(report, cfg, out)
    if cfg.emit_fields:
        for s in report.solutions:
            write_fields(s, out / f"fields_{cfg.case}_N{s.record.n}.txt")
    failed = [r.n for r in report.records if not r.converged]
    for r in report.records:
        print(f"N={r.n:5d}  E1={r.e1:.6e}  Einf={r.einf:.6e}  iterations={r.iterations}  residual={r.residual:.2e}")
    for norm, fit in (("E1", report.fit_e1), ("Einf", report.fit_einf)):
        if fit is not None:
            print(f"fit {norm}: m = {fit.slope_m:.3f}, R2 = {fit.r_squared:.3f}")
    if failed:
        print(f"error: solver did not reach rel_tol on N = {failed}", file=sys.stderr)
        return EXIT_FAIL
    if not finite:
        print("error: non-finite value in the results", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_list(stream=None) -> int:
    stream = stream or sys.stdout
    print(f"{'case':26s} {'dim':>3s}  {'bc':8s} {'approaches':10s} description", file=stream)
    for c in CASES.values():
        print(f"{c.name:26s} {c.dim:>2d}D  {c.bc:8s} {','.join(c.approaches):10s} {c.description}", file=stream)
    print(f"\napproaches: {','.join(APPROACHES)}; kernels for D: {', '.join(KERNELS)}", file=stream)
    return EXIT_OK


def summary_rows(results) -> list:
    """One row per numbered criterion; lettered sub-checks (10a, 10b, ...) are merged."""
    from .suite import CriterionResult

    groups: dict = {}
    for r in results:
        groups.setdefault(r.number.rstrip("abcdefghij"), []).append(r)
    rows = []
    for number, rs in groups.items():
        if len(rs) == 1 and rs[0].number == number:
            rows.append(rs[0])
            continue
        rows.append(CriterionResult(number, "; ".join(f"{r.number} {r.title}" for r in rs),
                                    all(r.passed for r in rs), "; ".join(r.measured for r in rs),
                                    "; ".join(r.bound for r in rs)))
    return rows


def cmd_paper_suite(out: str | Path, jobs: int = 1, max_2d: int = 256, max_3d: int = 128,
                    timing: bool = True) -> int:
    """Run the acceptance matrix, write one folder per study plus summary.csv."""
    from .suite import MATRIX, StudyCache, run_acceptance

    out = Path(out)
    cache = StudyCache(jobs=jobs, grid_cap={2: max_2d, 3: max_3d})
    results = run_acceptance(cache)
    finite = True
    for spec in MATRIX:
        report = cache(spec)
        cfg = RunConfig(case=spec.case, approach=spec.approach, indicator=spec.indicator, n_prop=spec.n_prop,
                        kernel=spec.kernel, eta=spec.eta, timing=timing)
        finite &= write_study(report, cfg, out / spec.key.replace("/", "__"))
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for r in summary_rows(results):
            w.writerow([r.number, r.title, str(r.passed).lower(), r.measured, r.bound])
    for r in results:
        print(r.line())
        for d in r.details:
            print(f"    {d}")
    if not finite:
        print("error: non-finite value in the results", file=sys.stderr)
    return EXIT_OK if finite and all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fluxvp", description="Flux-based volume-penalized Poisson verification runs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one convergence study")
    run.add_argument("--config", required=True, help="flat key = value configuration file")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config entry")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--jobs", type=int, help="grid levels solved in parallel")
    run.add_argument("--emit-fields", action="store_true", help="dump q, q_exact, phi, chi per grid")

    sub.add_parser("list", help="list the case catalog")

    suite = sub.add_parser("paper-suite", help="run the acceptance matrix")
    suite.add_argument("--out", default="paper-suite", help="output directory")
    suite.add_argument("--jobs", type=int, default=1, help="grid levels solved in parallel")
    suite.add_argument("--max-2d", type=int, default=256, help="largest 2D grid")
    suite.add_argument("--max-3d", type=int, default=128, help="largest 3D grid")
    suite.add_argument("--no-timing", action="store_true", help="write wall_ms = 0")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        if args.command == "list":
            return cmd_list()
        if args.command == "paper-suite":
            return cmd_paper_suite(args.out, args.jobs, args.max_2d, args.max_3d, not args.no_timing)
        path = Path(args.config)
        if not path.is_file():
            print(f"error: config file not found: {path}", file=sys.stderr)
            return EXIT_USAGE
        cfg = load_config(path)
        if args.set:
            cfg = parse_config("\n".join(args.set), cfg)
        if args.out:
            cfg.out = args.out
        if args.jobs:
            cfg.jobs = args.jobs
        if args.emit_fields:
            cfg.emit_fields = True
        return cmd_run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
