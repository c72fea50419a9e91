"""Error norms, convergence orders and least-squares rate fits."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .cases import CASES, VerificationCase, get_case
from .forcing import ForcingConfig
from .indicator import IndicatorConfig
from .operator import build_operator
from .solver import SolveConfig, SolverError, solve, subtract_fluid_mean

log = logging.getLogger(__name__)


def error_norms(q, q_exact, phi, h: float, mode: str = "integral"):
    """``(E1, Einf)`` over cells with ``phi > 0``.

    ``mode="integral"`` gives ``E1 = h^dim sum |e|``; ``mode="mean"`` divides by
    the number of fluid cells instead.
    """
    q, q_exact, phi = (np.asarray(a, dtype=float) for a in (q, q_exact, phi))
    mask = phi > 0
    if not mask.any():
        raise ValueError("no fluid cells")
    e = np.abs(q - q_exact)[mask]
    if mode == "integral":
        e1 = h ** q.ndim * e.sum()
    elif mode == "mean":
        e1 = e.mean()
    else:
        raise ValueError(f"unknown norm mode {mode!r}")
    return float(e1), float(e.max())


def per_level_order(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    """Observed order between two levels whose spacings differ by ``ratio``."""
    if e_coarse <= 0 or e_fine <= 0:
        return float("nan")
    return float(np.log(e_coarse / e_fine) / np.log(ratio))


@dataclass
class ConvergenceFit:
    slope_m: float
    r_squared: float
    intercept: float
    n_points: int


def fit_convergence(h, errors) -> ConvergenceFit:
    """Least-squares line through ``(log10 h, log10 E)``; ``E ~ h^m``."""
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = e > 0
    if not keep.all():
        log.warning("excluding %d zero errors from the fit", int((~keep).sum()))
    h, e = h[keep], e[keep]
    if len(h) < 2:
        raise ValueError("need at least two nonzero errors to fit")
    if np.all(h == h[0]):
        raise ValueError("all grid spacings are equal; the slope is undefined")
    x, y = np.log10(h), np.log10(e)
    A = np.column_stack([x, np.ones_like(x)])
    (m, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    ss_res = np.sum((y - (m * x + b)) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ConvergenceFit(float(m), float(r2), float(b), len(h))


@dataclass
class ErrorRecord:
    n: int
    h: float
    e1: float
    einf: float
    iterations: int
    residual: float
    converged: bool
    wall_ms: float


@dataclass(frozen=True)
class StudyConfig:
    approach: str = "C"
    indicator: IndicatorConfig = IndicatorConfig()
    eta: float = 1e-8
    n_prop: int = 2
    kernel: str = "spline6"
    grids: tuple = ()
    solver: SolveConfig = SolveConfig(preconditioner="auto")
    norm_mode: str = "integral"

    @property
    def forcing(self) -> ForcingConfig:
        return ForcingConfig(self.approach, self.n_prop, self.kernel)


@dataclass
class CaseSolution:
    grid: object
    q: np.ndarray
    q_exact: np.ndarray
    phi: np.ndarray
    chi: np.ndarray
    record: ErrorRecord


def solve_case(case: VerificationCase, n: int, config: StudyConfig = StudyConfig()) -> CaseSolution:
    grid = case.grid(n)
    t0 = time.perf_counter()
    system = build_operator(case.problem(grid, config.indicator, config.forcing, config.eta))
    q, rep = solve(system, config.solver)
    wall = 1e3 * (time.perf_counter() - t0)
    fluid = system.phi > 0
    if case.zero_mean:
        q = subtract_fluid_mean(q, fluid)
    q = np.asarray(q, dtype=float)
    q_ex = np.asarray(case.q_exact(grid.cell_centers), dtype=float)
    if not np.all(np.isfinite(q)):
        raise SolverError("non-finite solution")
    e1, einf = error_norms(q, q_ex, system.phi, grid.h, config.norm_mode)
    rec = ErrorRecord(n, grid.h, e1, einf, rep.iterations, rep.residual, rep.converged, wall)
    if not rep.converged:
        log.warning("%s N=%d did not converge (residual %.3e)", case.name, n, rep.residual)
    return CaseSolution(grid, q, q_ex, system.phi, system.chi, rec)


@dataclass
class ConvergenceReport:
    case: str
    config: StudyConfig
    records: list
    fit_e1: ConvergenceFit | None
    fit_einf: ConvergenceFit | None
    orders_e1: list = field(default_factory=list)
    orders_einf: list = field(default_factory=list)
    solutions: list = field(default_factory=list)

    def record(self, n: int) -> ErrorRecord:
        return next(r for r in self.records if r.n == n)

    @property
    def accepted(self) -> list:
        return [r for r in self.records if r.converged]


def _solve_registered(name: str, n: int, config: StudyConfig) -> CaseSolution:
    return solve_case(get_case(name), n, config)


def run_convergence_study(case: VerificationCase, config: StudyConfig = StudyConfig(),
                          keep_solutions: bool = False, jobs: int = 1) -> ConvergenceReport:
    """Solve every grid level of ``case`` and fit the error decay.

    With ``jobs > 1`` registered cases solve their levels in worker processes;
    results are gathered in grid order, so the report does not depend on ``jobs``.
    """
    grids = tuple(config.grids) or case.grids
    if jobs > 1 and len(grids) > 1 and CASES.get(case.name) is case:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(jobs, len(grids))) as pool:
            sols = list(pool.map(_solve_registered, [case.name] * len(grids), grids, [config] * len(grids)))
    else:
        sols = [solve_case(case, n, config) for n in grids]
    records = [s.record for s in sols]
    if not keep_solutions:
        sols = []
    ok = [r for r in records if r.converged]
    if len(ok) < len(records):
        log.warning("%d non-converged levels excluded from the fit", len(records) - len(ok))
    fit1 = fitinf = None
    if len(ok) >= 2:
        fit1 = fit_convergence([r.h for r in ok], [r.e1 for r in ok])
        fitinf = fit_convergence([r.h for r in ok], [r.einf for r in ok])
    o1 = [per_level_order(a.e1, b.e1, a.h / b.h) for a, b in zip(records, records[1:])]
    oi = [per_level_order(a.einf, b.einf, a.h / b.h) for a, b in zip(records, records[1:])]
    return ConvergenceReport(case.name, config, records, fit1, fitinf, o1, oi, list(sols))


# ------------------------------------------------------------------ published tables

@dataclass
class ReferenceSeries:
    series: str  # "<case>/<approach>/<indicator>"
    norm: str
    n: np.ndarray
    error: np.ndarray  # as printed
    error_used: np.ndarray  # decade typos repaired from the printed per-level orders
    flags: list
    fit_m: float
    fit_r2: float
    lower: float = 0.0
    upper: float = 2 * np.pi

    @property
    def h(self):
        return (self.upper - self.lower) / self.n


def load_reference_tables() -> list:
    """Published error tables shipped with the package."""
    text = resources.files("fluxvp").joinpath("data/reference_errors.csv").read_text()
    rows = list(csv.DictReader(text.splitlines()))
    out: dict = {}
    for r in rows:
        out.setdefault((r["series"], r["norm"]), []).append(r)
    series = []
    for (name, norm), rs in out.items():
        series.append(ReferenceSeries(
            name, norm,
            np.array([int(r["N"]) for r in rs]),
            np.array([float(r["error"]) for r in rs]),
            np.array([float(r["error_used"]) for r in rs]),
            [r["flag"] for r in rs],
            float(rs[0]["fit_m"]), float(rs[0]["fit_r2"]),
        ))
    return series
