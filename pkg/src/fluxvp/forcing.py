"""Flux-forcing fields beta with beta . n = -g on the interface, and the penalized RHS.

Four constructions are provided:

* ``A``: beta from a known gradient field (``kappa * grad(q~)``) sampled on faces;
* ``B``: beta = g grad(phi) for spatially constant g;
* ``C``: g extended off the interface along normals, then beta = g grad(phi);
* ``D``: marker values -g n spread to faces with a regularized kernel.  This one
  is kept as a negative control: it does not converge under refinement.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import SignedDistance
from .grid import CartesianGrid, FaceField, _slc, cell_to_face, face_divergence

log = logging.getLogger(__name__)

APPROACHES = ("A", "B", "C", "D")
KERNELS = ("top_hat", "spline6")


@dataclass
class BoundaryData:
    """Flux data on one interface.

    ``g`` is either a number or a callable ``g(x, n)`` of interface points and
    the unit normal there (pointing into the solid).  ``zeta`` is the Robin
    coefficient; zero means a Neumann condition.
    """

    g: Callable | float
    zeta: float = 0.0

    @property
    def constant(self) -> float | None:
        return None if callable(self.g) else float(self.g)

    def g_at(self, x, n) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if callable(self.g):
            return np.asarray(self.g(x, np.asarray(n, dtype=float)), dtype=float)
        return np.full(x.shape[:-1], float(self.g))


@dataclass(frozen=True)
class ForcingConfig:
    approach: str = "C"
    n_prop: int = 2
    kernel: str = "spline6"

    def __post_init__(self):
        if self.approach not in APPROACHES:
            raise ValueError(f"unknown approach {self.approach!r}")
        if int(self.n_prop) != self.n_prop or self.n_prop < 0:
            raise ValueError("n_prop must be a non-negative integer")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; expected one of {KERNELS}")


# ---------------------------------------------------------------- Approach A / B

def flux_forcing_A(grid: CartesianGrid, flux) -> FaceField:
    """Sample a vector field ``flux(x) -> (..., dim)`` at face centres."""
    return tuple(np.asarray(flux(grid.face_centers(a)))[..., a] for a in range(grid.dim))


def _phi_face_gradient(phi, grid):
    """Two-point ``(phi_i - phi_{i-1}) / h`` on interior faces; zero on the domain boundary."""
    out = []
    for a in range(grid.dim):
        f = np.zeros(grid.face_shape(a))
        f[_slc(grid.dim, a, slice(1, -1))] = np.diff(phi, axis=a) / grid.h
        out.append(f)
    return tuple(out)


def flux_forcing_B(phi, g: float, grid: CartesianGrid) -> FaceField:
    if callable(g):
        raise ValueError("approach B needs a spatially constant g")
    return tuple(float(g) * d for d in _phi_face_gradient(phi, grid))


# ---------------------------------------------------------------- Approach C

@dataclass
class InterfaceCellSet:
    index: np.ndarray  # (M, dim) integer cell indices
    normal: np.ndarray  # (M, dim) unit normals pointing into the solid
    closest: np.ndarray  # (M, dim) closest interface points
    skipped: int = 0  # cells dropped because the normal could not be formed

    def __len__(self):
        return len(self.index)


def _discrete_gradient(phi, grid):
    """Centred differences in the interior, one-sided on the rim."""
    return np.stack(np.gradient(phi, grid.h, edge_order=1), axis=-1)


def find_interface_cells(phi, grid: CartesianGrid, sdf: SignedDistance | None = None) -> InterfaceCellSet:
    """Cells that straddle the zero level set or lie within half a cell of it.

    Normals come from the SDF closure when one is given, otherwise from centred
    differences of the sampled ``phi``.
    """
    phi = np.asarray(phi, dtype=float)
    flag = np.abs(phi) <= 0.5 * grid.h
    for a in range(grid.dim):
        lo, hi = _slc(grid.dim, a, slice(None, -1)), _slc(grid.dim, a, slice(1, None))
        change = np.signbit(phi[lo]) != np.signbit(phi[hi])
        flag[lo] |= change
        flag[hi] |= change
    idx = np.argwhere(flag)
    x = grid.cell_centers[tuple(idx.T)]
    p = phi[tuple(idx.T)]
    if sdf is not None:
        grad = sdf.gradient(x)
    else:
        grad = _discrete_gradient(phi, grid)[tuple(idx.T)]
    mag = np.linalg.norm(grad, axis=-1)
    ok = mag >= 1e-8
    skipped = int(np.count_nonzero(~ok))
    if skipped:
        log.warning("skipping %d interface cells with vanishing normal", skipped)
    n = -grad[ok] / mag[ok, None]
    closest = x[ok] + p[ok, None] * n
    return InterfaceCellSet(idx[ok], n, closest, skipped)


# sub-steps per cell width when marching along a propagation segment
PROP_SUBSTEPS = 8


def extend_g(cells: InterfaceCellSet, g_values, grid: CartesianGrid, n_prop: int = 2):
    """Copy interface g values to every cell crossed by the segments ``x +- s n``, ``0 < s <= n_prop h``.

    Segments are marched in steps of ``h / PROP_SUBSTEPS``.  Interface cells keep
    their own value; when several segments reach the same cell the value of
    largest modulus wins (the earliest write on exact ties).
    Returns ``(g_cells, visited)``.
    """
    g_cells = np.zeros(grid.shape)
    visited = np.zeros(grid.shape, dtype=bool)
    if len(cells) == 0:
        return g_cells, visited
    g_values = np.asarray(g_values, dtype=float)
    own = tuple(cells.index.T)
    g_cells[own] = g_values
    visited[own] = True
    is_iface = visited.copy()
    if n_prop == 0:
        return g_cells, visited

    x = grid.cell_centers[own]
    steps = grid.h * np.arange(1, n_prop * PROP_SUBSTEPS + 1) / PROP_SUBSTEPS
    targets, vals = [], []
    for s in np.concatenate([steps, -steps]):
        t = grid.cell_index(x + s * cells.normal)
        targets.append(np.ravel_multi_index(tuple(t.T), grid.shape))
        vals.append(g_values)
    targets = np.concatenate(targets)
    vals = np.concatenate(vals)
    keep = ~is_iface.ravel()[targets]
    targets, vals = targets[keep], vals[keep]
    order = np.lexsort((np.arange(len(vals)), -np.abs(vals), targets))
    targets, vals = targets[order], vals[order]
    first = np.ones(len(targets), dtype=bool)
    first[1:] = targets[1:] != targets[:-1]
    g_cells.ravel()[targets[first]] = vals[first]
    visited.ravel()[targets[first]] = True
    return g_cells, visited


@dataclass
class ForcingDiagnostics:
    interface_cells: int = 0
    skipped_cells: int = 0
    visited_cells: int = 0
    extra: dict = field(default_factory=dict)


def flux_forcing_C(phi, sdf: SignedDistance | None, data: BoundaryData, grid: CartesianGrid, n_prop: int = 2):
    cells = find_interface_cells(phi, grid, sdf)
    g_iface = data.g_at(cells.closest, cells.normal)
    g_cells, visited = extend_g(cells, g_iface, grid, n_prop)
    g_face = cell_to_face(g_cells, grid)
    beta = tuple(gf * d for gf, d in zip(g_face, _phi_face_gradient(phi, grid)))
    diag = ForcingDiagnostics(len(cells), cells.skipped, int(visited.sum()))
    return beta, diag


# ---------------------------------------------------------------- Approach D

def kernel_weight(r, kernel: str = "spline6") -> np.ndarray:
    """1D kernel weights for offsets ``r`` measured in cells."""
    r = np.abs(np.asarray(r, dtype=float))
    if kernel == "top_hat":
        return np.where(r <= 0.5, 1.0, 0.0)
    if kernel != "spline6":
        raise ValueError(f"unknown kernel {kernel!r}")
    s = r + 3.0
    w1 = (-5 * s**5 + 90 * s**4 - 630 * s**3 + 2130 * s**2 - 3465 * s + 2193) / 60.0
    w2 = (5 * s**5 - 120 * s**4 + 1140 * s**3 - 5340 * s**2 + 12270 * s - 10974) / 120.0
    w3 = (-s**5 + 30 * s**4 - 360 * s**3 + 2160 * s**2 - 6480 * s + 7776) / 120.0
    return np.where(r < 1, w1, np.where(r < 2, w2, np.where(r < 3, w3, 0.0)))


def _support(kernel):
    return 0.5 if kernel == "top_hat" else 3.0


def spread_to_faces(points, values, grid: CartesianGrid, kernel: str = "spline6") -> FaceField:
    """Spread marker vectors ``values`` (M, dim) to faces with tensor-product kernel weights."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    R = _support(kernel)
    W = int(2 * R) + 2
    d = grid.dim
    out = []
    for a in range(d):
        shape = grid.face_shape(a)
        acc = np.zeros(shape)
        idx_1d, w_1d = [], []
        for ax in range(d):
            off = 0.0 if ax == a else 0.5
            s = (points[:, ax] - grid.lower) / grid.h - off
            i0 = np.floor(s - R).astype(int)
            ii = i0[:, None] + np.arange(W)[None, :]
            w = kernel_weight(ii - s[:, None], kernel)
            valid = (ii >= 0) & (ii < shape[ax])
            idx_1d.append(np.clip(ii, 0, shape[ax] - 1))
            w_1d.append(np.where(valid, w, 0.0))
        # tensor product over axes -> (M, W, W[, W])
        wt = w_1d[0]
        for ax in range(1, d):
            wt = wt[..., None] * w_1d[ax].reshape((len(points),) + (1,) * ax + (W,))
        grids = np.meshgrid(*[np.arange(W)] * d, indexing="ij")
        flat_idx = [idx_1d[ax][:, grids[ax]] for ax in range(d)]
        contrib = wt * values[:, a].reshape((-1,) + (1,) * d)
        np.add.at(acc, tuple(flat_idx), contrib)
        out.append(acc)
    return tuple(out)


def flux_forcing_D(sdf: SignedDistance, data: BoundaryData, grid: CartesianGrid, kernel: str = "spline6"):
    pts, nrm = sdf.boundary_points(grid.h)
    beta_markers = -data.g_at(pts, nrm)[:, None] * nrm
    return spread_to_faces(pts, beta_markers, grid, kernel), ForcingDiagnostics(extra={"markers": len(pts)})


# ---------------------------------------------------------------- RHS

def vp_rhs(f_cells, chi_cells, beta: FaceField | None, grid: CartesianGrid) -> np.ndarray:
    """``(1 - chi) f + div(chi beta) - chi div(beta)`` for a single interface."""
    rhs = (1.0 - chi_cells) * f_cells
    if beta is not None:
        rhs = rhs + forcing_term(chi_cells, beta, grid)
    return rhs


def forcing_term(chi_cells, beta: FaceField, grid: CartesianGrid) -> np.ndarray:
    chi_f = cell_to_face(chi_cells, grid)
    return face_divergence(tuple(c * b for c, b in zip(chi_f, beta)), grid) - chi_cells * face_divergence(beta, grid)
