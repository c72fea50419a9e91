"""Uniform staggered Cartesian grids in two and three dimensions.

Cell-centred fields are numpy arrays of shape ``(N,) * dim`` indexed ``[i, j(, k)]``
with axis 0 along x.  A face field is a tuple with one array per axis; the array
for axis ``a`` has ``N + 1`` entries along ``a`` and ``N`` along the others, so
face ``i`` on axis ``a`` sits between cells ``i - 1`` and ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

FaceField = tuple  # tuple[np.ndarray, ...], one array per axis


@dataclass(frozen=True)
class CartesianGrid:
    """Cube ``[lower, upper]^dim`` split into ``n`` cells per axis."""

    dim: int
    n: int
    lower: float
    upper: float

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need at least 2 cells per axis, got {self.n}")
        if not np.isfinite(self.lower) or not np.isfinite(self.upper) or self.upper <= self.lower:
            raise ValueError(f"invalid extent [{self.lower}, {self.upper}]")

    @property
    def h(self) -> float:
        return (self.upper - self.lower) / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    def face_shape(self, axis: int) -> tuple[int, ...]:
        s = [self.n] * self.dim
        s[axis] += 1
        return tuple(s)

    def centers_1d(self) -> np.ndarray:
        return self.lower + (np.arange(self.n) + 0.5) * self.h

    def nodes_1d(self) -> np.ndarray:
        return self.lower + np.arange(self.n + 1) * self.h

    @cached_property
    def cell_centers(self) -> np.ndarray:
        """Array of shape ``shape + (dim,)`` holding cell-centre coordinates."""
        c = self.centers_1d()
        return np.stack(np.meshgrid(*([c] * self.dim), indexing="ij"), axis=-1)

    def face_centers(self, axis: int) -> np.ndarray:
        """Coordinates of the faces normal to ``axis``, shape ``face_shape(axis) + (dim,)``."""
        axes = [self.centers_1d()] * self.dim
        axes[axis] = self.nodes_1d()
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def cell_index(self, x) -> np.ndarray:
        """Index of the cell whose centre is nearest to ``x`` (ties go to the lower index).

        Points outside the domain are clipped onto the boundary cells.
        """
        s = (np.asarray(x, dtype=float) - self.lower) / self.h - 0.5
        idx = np.ceil(s - 0.5).astype(int)
        return np.clip(idx, 0, self.n - 1)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def face_zeros(self) -> FaceField:
        return tuple(np.zeros(self.face_shape(a)) for a in range(self.dim))


def build_grid(lower: float, upper: float, n: int, dim: int = 2) -> CartesianGrid:
    return CartesianGrid(dim=dim, n=n, lower=float(lower), upper=float(upper))


def _slc(dim, axis, s):
    out = [slice(None)] * dim
    out[axis] = s
    return tuple(out)


def cell_to_face(field: np.ndarray, grid: CartesianGrid) -> FaceField:
    """Interpolate a cell field to faces.

    Interior faces take the mean of the two adjacent cells; boundary faces copy
    the adjacent cell value.
    """
    field = np.asarray(field, dtype=float)
    if field.shape != grid.shape:
        raise ValueError(f"expected cell field of shape {grid.shape}, got {field.shape}")
    out = []
    d = grid.dim
    for a in range(d):
        f = np.empty(grid.face_shape(a))
        f[_slc(d, a, slice(1, -1))] = 0.5 * (field[_slc(d, a, slice(None, -1))] + field[_slc(d, a, slice(1, None))])
        f[_slc(d, a, 0)] = field[_slc(d, a, 0)]
        f[_slc(d, a, -1)] = field[_slc(d, a, -1)]
        out.append(f)
    return tuple(out)


def face_difference(field: np.ndarray, grid: CartesianGrid) -> FaceField:
    """``(u[i] - u[i-1]) / h`` on interior faces, zero on domain-boundary faces."""
    d = grid.dim
    out = []
    for a in range(d):
        f = np.zeros(grid.face_shape(a))
        f[_slc(d, a, slice(1, -1))] = np.diff(field, axis=a) / grid.h
        out.append(f)
    return tuple(out)


def face_divergence(faces: FaceField, grid: CartesianGrid) -> np.ndarray:
    """Cell-centred divergence ``sum_a (F[i+1] - F[i]) / h`` of a face field."""
    div = np.zeros(grid.shape)
    for a, f in enumerate(faces):
        div += np.diff(f, axis=a)
    return div / grid.h
