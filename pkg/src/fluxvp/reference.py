"""Slow, loop-based dense assembly of the penalized operator.

Written cell by cell with explicit neighbour bookkeeping and kept separate from
the vectorized code in ``operator``.  Only meant for small grids, where it
serves as an oracle for the matrix-free operator.
"""
from __future__ import annotations

import itertools

import numpy as np

from .grid import CartesianGrid


def _face_mean(field, idx, axis, side, shape):
    """Cell field interpolated to the face on ``side`` (-1 low, +1 high) of cell ``idx``."""
    nb = list(idx)
    nb[axis] += side
    if 0 <= nb[axis] < shape[axis]:
        return 0.5 * (field[idx] + field[tuple(nb)])
    return field[idx]


def _centred_grad(phi, idx, axis, h):
    """Centred difference, one-sided next to the box wall."""
    n = phi.shape[axis]
    i = idx[axis]
    lo, hi = list(idx), list(idx)
    if i == 0:
        hi[axis] = 1
        return (phi[tuple(hi)] - phi[idx]) / h
    if i == n - 1:
        lo[axis] = n - 2
        return (phi[idx] - phi[tuple(lo)]) / h
    lo[axis], hi[axis] = i - 1, i + 1
    return (phi[tuple(hi)] - phi[tuple(lo)]) / (2 * h)


def _face_normal_component(phi, idx, axis, side, h):
    """Axis component of ``-grad(phi)/|grad(phi)|`` on a face of cell ``idx``; zero on the box."""
    nb = list(idx)
    nb[axis] += side
    if not 0 <= nb[axis] < phi.shape[axis]:
        return 0.0
    nb = tuple(nb)
    left, right = (nb, idx) if side < 0 else (idx, nb)
    normal = (phi[right] - phi[left]) / h
    mag2 = normal**2
    for b in range(phi.ndim):
        if b != axis:
            mag2 += (0.5 * (_centred_grad(phi, left, b, h) + _centred_grad(phi, right, b, h))) ** 2
    mag = np.sqrt(mag2)
    return -normal / mag if mag >= 1e-8 else 0.0


def dense_operator(grid: CartesianGrid, chi, kappa, eta: float, robin=(), penalty=None,
                   exterior_kind: str = "dirichlet") -> np.ndarray:
    """Dense matrix of the penalized operator on ``grid``.

    ``robin`` is a sequence of ``(chi_j, zeta_j, phi_j)`` triples; ``penalty``
    an optional extra diagonal (Dirichlet ``chi/eta`` terms).
    """
    shape, h, dim = grid.shape, grid.h, grid.dim
    chi = np.asarray(chi, dtype=float)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), shape)
    n = grid.size
    A = np.zeros((n, n))
    box = 2.0 if exterior_kind == "dirichlet" else 0.0
    for idx in itertools.product(*(range(s) for s in shape)):
        row = np.ravel_multi_index(idx, shape)
        for axis in range(dim):
            for side in (-1, 1):
                c = _face_mean(chi, idx, axis, side, shape)
                k = _face_mean(kappa, idx, axis, side, shape)
                psi = (k * (1 - c) + eta * c) / h**2
                nb = list(idx)
                nb[axis] += side
                if 0 <= nb[axis] < shape[axis]:
                    A[row, row] += psi
                    A[row, np.ravel_multi_index(tuple(nb), shape)] -= psi
                else:
                    A[row, row] += box * psi
        for chi_j, zeta, phi_j in robin:
            chi_j = np.asarray(chi_j, dtype=float)
            phi_j = np.asarray(phi_j, dtype=float)
            term = 0.0
            for axis in range(dim):
                hi = _face_normal_component(phi_j, idx, axis, 1, h)
                lo = _face_normal_component(phi_j, idx, axis, -1, h)
                c_hi = _face_mean(chi_j, idx, axis, 1, shape)
                c_lo = _face_mean(chi_j, idx, axis, -1, shape)
                term += (c_hi * hi - c_lo * lo) / h - chi_j[idx] * (hi - lo) / h
            A[row, row] += zeta * term
        if penalty is not None:
            A[row, row] += penalty[idx]
    return A
