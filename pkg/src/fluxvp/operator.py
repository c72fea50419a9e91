"""Discrete volume-penalized Poisson operator.

For cell ``c`` with face coefficients ``psi_f = blend_f / h^2``::

    (L q)_c = sum_f psi_f (q_c - q_nb(f)) + d_c q_c

where ``blend = kappa (1 - chi) + eta chi`` and ``d_c`` collects the Robin
terms ``zeta [div(chi n) - chi div(n)]`` and Dirichlet penalties ``chi_d / eta``.
Faces on the outer box use a ghost cell ``q_g = 2 q_bc - q_c`` (Dirichlet) or
``q_g = q_c`` (zero flux).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .forcing import (BoundaryData, ForcingConfig, ForcingDiagnostics, flux_forcing_A, flux_forcing_B,
                      flux_forcing_C, flux_forcing_D, forcing_term)
from .geometry import SignedDistance
from .grid import CartesianGrid, FaceField, _slc
from .indicator import IndicatorConfig, diffusion_blend, indicator

log = logging.getLogger(__name__)


@dataclass
class FluxInterface:
    """Neumann (``zeta == 0``) or Robin interface.  ``flux`` is the field used by approach A."""

    sdf: SignedDistance
    data: BoundaryData
    flux: Callable | None = None

    @property
    def robin(self) -> bool:
        return self.data.zeta != 0


@dataclass
class DirichletInterface:
    """Interface where ``q = value(x)`` is imposed by the ``chi / eta`` penalty."""

    sdf: SignedDistance
    value: Callable | float = 0.0


@dataclass
class PenalizedProblem:
    grid: CartesianGrid
    f: Callable  # f(x) on points (..., dim)
    interfaces: list
    dirichlet: list = field(default_factory=list)
    kappa: float | Callable = 1.0
    eta: float = 1e-8
    indicator: IndicatorConfig = IndicatorConfig()
    forcing: ForcingConfig = ForcingConfig()
    exterior: Callable | None = None  # q on the outer box; None means homogeneous
    exterior_kind: str = "dirichlet"


def _cell_values(v, grid):
    if callable(v):
        return np.asarray(v(grid.cell_centers), dtype=float)
    return np.full(grid.shape, float(v))


def face_normals(phi, grid: CartesianGrid) -> FaceField:
    """``-grad(phi)/|grad(phi)|`` on interior faces; zero where ``|grad phi| < 1e-8`` and on the box."""
    d = grid.dim
    cgrad = np.gradient(phi, grid.h, edge_order=1) if d > 1 else [np.gradient(phi, grid.h)]
    out = []
    for a in range(d):
        n = np.zeros(grid.face_shape(a))
        inner = _slc(d, a, slice(1, -1))
        lo, hi = _slc(d, a, slice(None, -1)), _slc(d, a, slice(1, None))
        normal_part = np.diff(phi, axis=a) / grid.h
        mag2 = normal_part**2
        for b in range(d):
            if b != a:
                mag2 = mag2 + (0.5 * (cgrad[b][lo] + cgrad[b][hi])) ** 2
        mag = np.sqrt(mag2)
        n[inner] = np.where(mag >= 1e-8, -normal_part / np.where(mag >= 1e-8, mag, 1.0), 0.0)
        out.append(n)
    return tuple(out)


def robin_diagonal(chi_cells, zeta: float, phi, grid: CartesianGrid) -> np.ndarray:
    """``zeta [div(chi n) - chi div(n)]`` evaluated per cell (a diagonal operator)."""
    n = face_normals(phi, grid)
    return zeta * forcing_term(chi_cells, n, grid)


@dataclass
class DiscreteSystem:
    """Matrix-free operator plus right-hand side for one penalized problem."""

    grid: CartesianGrid
    psi: FaceField  # blend / h^2 on every face, box faces included
    diag_extra: np.ndarray
    rhs: np.ndarray
    exterior_kind: str = "dirichlet"
    phi: np.ndarray | None = None  # min over interfaces; > 0 in the fluid
    chi: np.ndarray | None = None
    diagnostics: list = field(default_factory=list)

    def _box_factor(self):
        return 2.0 if self.exterior_kind == "dirichlet" else 0.0

    def apply(self, q) -> np.ndarray:
        g, d = self.grid, self.grid.dim
        q = np.asarray(q)
        q = q.astype(np.result_type(q.dtype, np.float64), copy=False).reshape(g.shape)
        out = self.diag_extra * q
        bf = self._box_factor()
        for a, F in enumerate(self.psi):
            flux = F[_slc(d, a, slice(1, -1))] * np.diff(q, axis=a)
            out[_slc(d, a, slice(None, -1))] -= flux
            out[_slc(d, a, slice(1, None))] += flux
            if bf:
                out[_slc(d, a, 0)] += bf * F[_slc(d, a, 0)] * q[_slc(d, a, 0)]
                out[_slc(d, a, -1)] += bf * F[_slc(d, a, -1)] * q[_slc(d, a, -1)]
        return out

    __call__ = apply

    def matvec(self, v):
        return self.apply(v).ravel()

    def diagonal(self) -> np.ndarray:
        d = self.grid.dim
        diag = self.diag_extra.copy()
        bf = self._box_factor()
        for a, F in enumerate(self.psi):
            diag += F[_slc(d, a, slice(None, -1))] + F[_slc(d, a, slice(1, None))]
            diag[_slc(d, a, 0)] += (bf - 1) * F[_slc(d, a, 0)]
            diag[_slc(d, a, -1)] += (bf - 1) * F[_slc(d, a, -1)]
        return diag

    def to_sparse(self) -> sp.csr_matrix:
        g, d = self.grid, self.grid.dim
        n = g.size
        ids = np.arange(n).reshape(g.shape)
        rows, cols, vals = [np.arange(n)], [np.arange(n)], [self.diagonal().ravel()]
        for a, F in enumerate(self.psi):
            lo = ids[_slc(d, a, slice(None, -1))].ravel()
            hi = ids[_slc(d, a, slice(1, None))].ravel()
            w = -F[_slc(d, a, slice(1, -1))].ravel()
            rows += [lo, hi]
            cols += [hi, lo]
            vals += [w, w]
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def assemble_system(grid: CartesianGrid, chi, kappa, eta: float, diag_extra=None, rhs=None,
                    exterior_kind: str = "dirichlet", phi=None, diagnostics=None) -> DiscreteSystem:
    """Build a ``DiscreteSystem`` straight from cell fields.

    ``chi`` is the total solid indicator, ``kappa`` the fluid coefficient and
    ``diag_extra`` any extra diagonal (Robin, Dirichlet penalty).
    """
    chi = np.asarray(chi, dtype=float)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), grid.shape)
    _, blend = diffusion_blend(chi, kappa, eta, grid)
    psi = tuple(b / grid.h**2 for b in blend)
    diag_extra = np.zeros(grid.shape) if diag_extra is None else np.asarray(diag_extra, dtype=float)
    rhs = np.zeros(grid.shape) if rhs is None else np.asarray(rhs, dtype=float)
    return DiscreteSystem(grid, psi, diag_extra, rhs, exterior_kind, phi=phi, chi=chi,
                          diagnostics=list(diagnostics or []))


def _beta_for(iface: FluxInterface, phi, grid, cfg: ForcingConfig):
    diag = ForcingDiagnostics()
    if cfg.approach == "A":
        if iface.flux is None:
            raise ValueError("approach A needs a flux field on every interface")
        return flux_forcing_A(grid, iface.flux), diag
    if cfg.approach == "B":
        if iface.data.constant is None:
            raise ValueError("approach B needs a spatially constant g")
        return flux_forcing_B(phi, iface.data.constant, grid), diag
    if cfg.approach == "C":
        return flux_forcing_C(phi, iface.sdf, iface.data, grid, cfg.n_prop)
    return flux_forcing_D(iface.sdf, iface.data, grid, cfg.kernel)


def build_operator(problem: PenalizedProblem) -> DiscreteSystem:
    """Assemble face coefficients, diagonal terms and the RHS for ``problem``."""
    g = problem.grid
    if problem.exterior_kind not in ("dirichlet", "neumann"):
        raise ValueError(f"unknown exterior condition {problem.exterior_kind!r}")
    if not problem.interfaces and not problem.dirichlet:
        raise ValueError("problem has no interfaces")
    h = g.h
    f = _cell_values(problem.f, g)
    kappa = _cell_values(problem.kappa, g)

    chi_total = np.zeros(g.shape)
    diag_extra = np.zeros(g.shape)
    rhs_forcing = np.zeros(g.shape)
    phis, diagnostics = [], []
    for iface in problem.interfaces:
        phi = iface.sdf.sample(g)
        phis.append(phi)
        chi = indicator(phi, h, problem.indicator)
        chi_total += chi
        beta, diag = _beta_for(iface, phi, g, problem.forcing)
        diagnostics.append(diag)
        rhs_forcing += forcing_term(chi, beta, g)
        if iface.robin:
            diag_extra += robin_diagonal(chi, iface.data.zeta, phi, g)
    if np.any(chi_total > 1 + 1e-12):
        log.warning("solid indicators overlap; clipping the sum to 1")
    chi_total = np.minimum(chi_total, 1.0)

    rhs = (1.0 - chi_total) * f + rhs_forcing
    for dface in problem.dirichlet:
        phi = dface.sdf.sample(g)
        phis.append(phi)
        chi_d = indicator(phi, h, problem.indicator)
        diag_extra += chi_d / problem.eta
        rhs += chi_d * _cell_values(dface.value, g) / problem.eta

    system = assemble_system(g, chi_total, kappa, problem.eta, diag_extra, rhs, problem.exterior_kind,
                             phi=np.minimum.reduce(phis), diagnostics=diagnostics)
    psi = system.psi
    if problem.exterior_kind == "dirichlet" and problem.exterior is not None:
        d = g.dim
        for a, F in enumerate(psi):
            xf = g.face_centers(a)
            for end, cell in ((0, 0), (-1, -1)):
                qb = np.asarray(problem.exterior(xf[_slc(d, a, end)]), dtype=float)
                system.rhs[_slc(d, a, cell)] += 2.0 * F[_slc(d, a, end)] * qb
    return system


def build_neumann_operator(problem: PenalizedProblem) -> DiscreteSystem:
    if any(i.robin for i in problem.interfaces):
        raise ValueError("problem has Robin interfaces; use build_robin_operator")
    return build_operator(problem)


def build_robin_operator(problem: PenalizedProblem) -> DiscreteSystem:
    if not any(i.robin for i in problem.interfaces):
        raise ValueError("problem has no Robin interface")
    return build_operator(problem)
