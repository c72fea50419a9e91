"""The acceptance matrix: which convergence studies to run and the bounds they must meet.

Studies are cached by their full configuration, so criteria that share a run
(the hexagram study feeds three of them) solve it only once.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .cases import CASES, get_case
from .forcing import find_interface_cells, flux_forcing_B, flux_forcing_C
from .grid import _slc
from .indicator import IndicatorConfig
from .operator import assemble_system, robin_diagonal
from .reference import dense_operator
from .solver import SolveConfig, fgmres
from .verify import ConvergenceReport, StudyConfig, fit_convergence, load_reference_tables, run_convergence_study

log = logging.getLogger(__name__)

REL_TOL = 1e-12


@dataclass(frozen=True)
class StudySpec:
    case: str
    approach: str
    indicator: str
    kernel: str = "spline6"
    eta: float = 1e-8
    n_prop: int = 2
    grids: tuple = ()

    @property
    def key(self) -> str:
        k = f"{self.case}/{self.approach}"
        if self.approach == "D":
            k += f"-{self.kernel}"
        k += f"/{self.indicator}"
        if self.eta != 1e-8:
            k += f"/eta={self.eta:g}"
        return k

    def config(self, solver: SolveConfig | None = None) -> StudyConfig:
        return StudyConfig(approach=self.approach, indicator=IndicatorConfig(self.indicator), eta=self.eta,
                           n_prop=self.n_prop, kernel=self.kernel, grids=tuple(self.grids),
                           solver=solver or SolveConfig(rel_tol=REL_TOL, preconditioner="auto"))


ANNULUS_B = StudySpec("annulus-neumann", "B", "continuous")
ANNULUS_A = StudySpec("annulus-neumann", "A", "continuous")
ANNULUS_C = StudySpec("annulus-neumann", "C", "discontinuous")
SPHERE_OUT_B = StudySpec("sphere-out", "B", "continuous")
HEXAGRAM_C = StudySpec("hexagram-neumann", "C", "discontinuous")
ANNULUS_ROBIN_B = StudySpec("annulus-robin", "B", "continuous")
HEXAGRAM_ROBIN_C = StudySpec("hexagram-robin", "C", "discontinuous")
ROUNDED_C = StudySpec("rounded-hexagram-neumann", "C", "discontinuous")
ROUNDED_ROBIN_C = StudySpec("rounded-hexagram-robin", "C", "discontinuous")
CIRCLE_C = StudySpec("circle-neumann", "C", "continuous")
CIRCLE_D_TOPHAT = StudySpec("circle-neumann", "D", "continuous", kernel="top_hat")
CIRCLE_D_SPLINE = StudySpec("circle-neumann", "D", "continuous", kernel="spline6")
ETA_VALUES = (1e-2, 1e-4, 1e-8, 1e-12)
ETA_SWEEP = tuple(StudySpec("hexagram-neumann", "C", kind, eta=eta)
                  for kind in ("continuous", "discontinuous") for eta in ETA_VALUES)

MATRIX = (ANNULUS_B, ANNULUS_A, ANNULUS_C, SPHERE_OUT_B, HEXAGRAM_C, ANNULUS_ROBIN_B, HEXAGRAM_ROBIN_C,
          ROUNDED_C, ROUNDED_ROBIN_C, CIRCLE_C, CIRCLE_D_TOPHAT, CIRCLE_D_SPLINE) + tuple(
              s for s in ETA_SWEEP if s != HEXAGRAM_C)


class StudyCache:
    """Runs each ``StudySpec`` at most once."""

    def __init__(self, jobs: int = 1, grid_cap: dict | None = None):
        self.jobs = jobs
        self.grid_cap = grid_cap or {}
        self.reports: dict = {}

    def __call__(self, spec: StudySpec) -> ConvergenceReport:
        if spec not in self.reports:
            case = get_case(spec.case)
            grids = spec.grids or case.grids
            cap = self.grid_cap.get(case.dim)
            if cap is not None:
                grids = tuple(n for n in grids if n <= cap)
            log.info("running %s on N=%s", spec.key, grids)
            self.reports[spec] = run_convergence_study(case, spec.config(), jobs=self.jobs) if grids == case.grids \
                else run_convergence_study(case, replace(spec, grids=grids).config(), jobs=self.jobs)
        return self.reports[spec]


@dataclass
class CriterionResult:
    number: str
    title: str
    passed: bool
    measured: str
    bound: str
    details: list = field(default_factory=list)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title}: {self.measured} (bound: {self.bound})"


def _slope(report: ConvergenceReport, norm: str) -> float:
    fit = report.fit_einf if norm == "einf" else report.fit_e1
    return float("nan") if fit is None else fit.slope_m


def _r2(report: ConvergenceReport, norm: str) -> float:
    fit = report.fit_einf if norm == "einf" else report.fit_e1
    return float("nan") if fit is None else fit.r_squared


def _in(x, lo, hi) -> bool:
    return bool(np.isfinite(x) and lo <= x <= hi)


def criterion_1(run) -> CriterionResult:
    r = run(ANNULUS_B)
    m, r2 = _slope(r, "einf"), _r2(r, "einf")
    return CriterionResult("1", "annulus Neumann, B, continuous", _in(m, 1.7, 2.2) and r2 >= 0.9,
                           f"m(Einf)={m:.3f}, R2={r2:.3f}", "m in [1.7, 2.2], R2 >= 0.9")


def criterion_2(run) -> CriterionResult:
    ra, rb = run(ANNULUS_A), run(ANNULUS_B)
    m = _slope(ra, "einf")
    gaps = {a.n: abs(a.einf - b.einf) / b.einf for a, b in zip(ra.records, rb.records) if a.n >= 128}
    ok = _in(m, 1.7, 2.2) and bool(gaps) and max(gaps.values()) <= 0.15
    gap_txt = ", ".join(f"N={n}: {g:.1%}" for n, g in gaps.items())
    return CriterionResult("2", "annulus Neumann, A, continuous", ok, f"m(Einf)={m:.3f}; |A-B|/B {gap_txt}",
                           "m in [1.7, 2.2]; A vs B within 15% at N >= 128")


def criterion_3(run) -> CriterionResult:
    m = _slope(run(ANNULUS_C), "einf")
    return CriterionResult("3", "annulus Neumann, C, discontinuous", _in(m, 1.2, 1.9), f"m(Einf)={m:.3f}",
                           "m in [1.2, 1.9]")


def criterion_4(run) -> CriterionResult:
    r = run(SPHERE_OUT_B)
    orders = [o for o in r.orders_einf]
    e64 = r.record(64).einf if any(x.n == 64 for x in r.records) else float("nan")
    ratio = e64 / 2.4095e-3
    ok = bool(orders) and all(abs(o - 2.0) <= 0.15 for o in orders) and 0.5 <= ratio <= 2.0
    return CriterionResult("4", "sphere fluid-outside, B, continuous", ok,
                           f"orders(Einf)={[round(o, 3) for o in orders]}, Einf(64)={e64:.5g}",
                           "every order 2.00 +- 0.15; Einf(64) within x2 of 2.4095e-3")


def criterion_5(run) -> CriterionResult:
    m = _slope(run(HEXAGRAM_C), "einf")
    return CriterionResult("5", "hexagram Neumann, C, discontinuous", _in(m, 0.55, np.inf), f"m(Einf)={m:.3f}",
                           "m >= 0.55")


def criterion_6(run) -> CriterionResult:
    m = _slope(run(ANNULUS_ROBIN_B), "einf")
    return CriterionResult("6", "annulus Robin, B, continuous", _in(m, 1.7, 2.2), f"m(Einf)={m:.3f}",
                           "m in [1.7, 2.2]")


def criterion_7(run) -> CriterionResult:
    pairs = {"neumann": (ROUNDED_C, HEXAGRAM_C), "robin": (ROUNDED_ROBIN_C, HEXAGRAM_ROBIN_C)}
    vals = {k: (_slope(run(a), "einf"), _slope(run(b), "einf")) for k, (a, b) in pairs.items()}
    ok = all(np.isfinite(r) and np.isfinite(s) and r > s for r, s in vals.values())
    txt = "; ".join(f"{k}: rounded {r:.3f} vs sharp {s:.3f}" for k, (r, s) in vals.items())
    return CriterionResult("7", "rounded vs sharp hexagram, C, discontinuous", ok, txt,
                           "rounded m(Einf) > sharp m(Einf)")


def criterion_8(run) -> CriterionResult:
    mc = _slope(run(CIRCLE_C), "e1")
    mt = _slope(run(CIRCLE_D_TOPHAT), "e1")
    ms = _slope(run(CIRCLE_D_SPLINE), "e1")
    ok = _in(mc, 0.7, np.inf) and _in(abs(mt), 0, 0.2) and _in(abs(ms), 0, 0.2)
    return CriterionResult("8", "circle negative control, C vs D", ok,
                           f"C m(E1)={mc:.3f}; D top_hat {mt:.3f}; D spline6 {ms:.3f}",
                           "C >= 0.7; |D| <= 0.2")


def criterion_9(run) -> CriterionResult:
    spreads, parts = [], []
    for kind in ("continuous", "discontinuous"):
        ms = {s.eta: _slope(run(s), "e1") for s in ETA_SWEEP if s.indicator == kind}
        core = [ms[e] for e in (1e-4, 1e-8, 1e-12)]
        spreads.append(max(core) - min(core) if all(np.isfinite(core)) else np.inf)
        parts.append(f"{kind}: " + ", ".join(f"eta={e:g}: {m:.3f}" for e, m in ms.items()))
    return CriterionResult("9", "eta sweep on hexagram, C", max(spreads) <= 0.15,
                           "; ".join(parts) + f"; spread {max(spreads):.3f}",
                           "m(E1) for eta in {1e-4, 1e-8, 1e-12} within 0.15")


# ------------------------------------------------------------------ criterion 10 (oracles)

def oracle_operator(seed: int = 0, n_vectors: int = 20) -> tuple:
    """Worst relative mismatch between matrix-free and dense loop-assembled operators."""
    from .grid import build_grid

    rng = np.random.default_rng(seed)
    worst = 0.0
    for dim in (2, 3):
        for robin in (False, True):
            g = build_grid(0.0, 2 * np.pi, 8, dim)
            chi = rng.random(g.shape)
            kappa = 0.5 + rng.random(g.shape)
            eta = 10.0 ** rng.uniform(-8, -2)
            terms = []
            diag = np.zeros(g.shape)
            if robin:
                chi_r, zeta, phi = rng.random(g.shape), rng.uniform(0.5, 2.0), rng.normal(size=g.shape)
                terms = [(chi_r, zeta, phi)]
                diag = robin_diagonal(chi_r, zeta, phi, g)
            system = assemble_system(g, chi, kappa, eta, diag)
            A = dense_operator(g, chi, kappa, eta, terms)
            for v in rng.normal(size=(n_vectors, g.size)):
                ref = A @ v
                worst = max(worst, np.linalg.norm(system.matvec(v) - ref) / np.linalg.norm(ref))
    return worst, 1e-13


def oracle_fgmres(seed: int = 1) -> tuple:
    """Worst infinity-norm gap between FGMRES and a dense direct solve."""
    import scipy.sparse as sp

    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (30, 80, 200):
        A = sp.random(n, n, density=0.05, random_state=rng) + sp.diags(2.0 + rng.random(n) * n ** 0.5)
        A = A.toarray()
        x_true = rng.normal(size=n)
        b = A @ x_true
        direct = np.linalg.solve(A, b)
        for pc in (None, lambda v, d=np.diag(A).copy(): v / d):
            x, rep = fgmres(lambda v: A @ v, b, SolveConfig(rel_tol=1e-14, restart=20), pc)
            worst = max(worst, float(np.max(np.abs(x - direct))))
    return worst, 1e-9


def oracle_fits(tol: float = 0.02) -> tuple:
    """Refit every published error series; returns (worst gap, tolerance, failures)."""
    worst, bad = 0.0, []
    for s in load_reference_tables():
        fit = fit_convergence(2 * np.pi / s.n, s.error_used)
        gap = max(abs(fit.slope_m - s.fit_m), abs(fit.r_squared - s.fit_r2))
        worst = max(worst, gap)
        if gap > tol:
            bad.append(f"{s.series}/{s.norm}")
    return worst, tol, bad


def _fd_laplacian(q, x, step):
    out = np.zeros(x.shape[:-1])
    for a in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[a] = step
        out += (q(x + e) - 2 * q(x) + q(x - e)) / step**2
    return out


def oracle_manufactured(seed: int = 2, n_points: int = 200) -> tuple:
    """Worst relative gap between ``f`` and ``-kappa lap(q_exact)`` (finite differences) over all cases."""
    from .cases import KAPPA

    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in CASES.values():
        x = rng.uniform(case.lower, case.upper, size=(20 * n_points, case.dim))
        x = x[case.phi(x) > 0.05][:n_points]
        f_fd = -KAPPA * _fd_laplacian(case.q_exact, x, 1e-3)
        f = case.f(x)
        worst = max(worst, float(np.max(np.abs(f_fd - f)) / max(np.max(np.abs(f)), 1e-300)))
    return worst, 1e-4


def _cell_beta(beta, grid):
    """Average the two face values per axis onto cell centres."""
    d = grid.dim
    return np.stack([0.5 * (b[_slc(d, a, slice(None, -1))] + b[_slc(d, a, slice(1, None))])
                     for a, b in enumerate(beta)], axis=-1)


def oracle_flux_trace(n: int = 128) -> tuple:
    """Worst ``|beta.n + g| / (h |g|)`` over annulus interface cells for approaches B and C."""
    case = get_case("annulus-neumann")
    g = case.grid(n)
    worst = 0.0
    for iface in case.interfaces():
        phi = iface.sdf.sample(g)
        cells = find_interface_cells(phi, g, iface.sdf)
        gval = iface.data.constant
        for beta in (flux_forcing_B(phi, gval, g), flux_forcing_C(phi, iface.sdf, iface.data, g, 2)[0]):
            bc = _cell_beta(beta, g)[tuple(cells.index.T)]
            x = g.cell_centers[tuple(cells.index.T)]
            nrm = iface.sdf.normal(x)
            err = np.abs(np.sum(bc * nrm, axis=-1) + gval)
            worst = max(worst, float(err.max() / (g.h * abs(gval))))
    return worst, 2.0


def criterion_10(run=None) -> list:
    out = []
    w, tol = oracle_operator()
    out.append(CriterionResult("10a", "matrix-free vs dense operator (8^2, 8^3, Neumann and Robin)", w <= tol,
                               f"max rel gap {w:.2e}", f"<= {tol:g}"))
    w, tol = oracle_fgmres()
    out.append(CriterionResult("10b", "FGMRES vs direct solve", w <= tol, f"max |x - x_direct| {w:.2e}",
                               f"<= {tol:g}"))
    w, tol, bad = oracle_fits()
    out.append(CriterionResult("10c", "refit of published error tables", not bad, f"max gap {w:.3f}, {len(bad)} off",
                               f"every (m, R2) within {tol}", bad))
    w, tol = oracle_manufactured()
    out.append(CriterionResult("10d", "manufactured forcing identity", w <= tol, f"max rel gap {w:.2e}",
                               f"<= {tol:g}"))
    w, tol = oracle_flux_trace()
    out.append(CriterionResult("10e", "beta.n = -g on annulus interface cells (B, C, N=128)", w <= tol,
                               f"max |beta.n + g| = {w:.3f} h |g|", f"<= {tol:g} h |g|"))
    return out


def criterion_11(run, specs=MATRIX) -> CriterionResult:
    bad = []
    for spec in specs:
        for r in run(spec).records:
            if not (r.converged and r.residual <= REL_TOL):
                bad.append(f"{spec.key} N={r.n}: residual {r.residual:.2e}")
    return CriterionResult("11", "solver residual on every run", not bad, f"{len(bad)} runs above {REL_TOL:g}",
                           f"relative residual <= {REL_TOL:g}", bad)


CRITERIA: tuple = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
                   criterion_8, criterion_9, criterion_10, criterion_11)


def run_acceptance(run: Callable | None = None) -> list:
    """Evaluate every criterion; returns a flat list of ``CriterionResult``."""
    run = run or StudyCache()
    results = []
    for crit in CRITERIA:
        res = crit(run)
        results.extend(res if isinstance(res, list) else [res])
    return results
