"""Solid indicator functions and the face diffusion blend."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CartesianGrid, cell_to_face

KINDS = ("continuous", "discontinuous")


@dataclass(frozen=True)
class IndicatorConfig:
    kind: str = "continuous"
    n_smear: float = 1.0  # half-width of the smoothing band, in cells

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown indicator kind {self.kind!r}; expected one of {KINDS}")
        if not (np.isfinite(self.n_smear) and self.n_smear > 0):
            raise ValueError(f"n_smear must be positive, got {self.n_smear}")


def _check_phi(phi):
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise ValueError("non-finite signed distance values")
    return phi


def chi_continuous(phi, h: float, n_smear: float = 1.0) -> np.ndarray:
    """Smoothed Heaviside of ``-phi`` over ``|phi| <= n_smear * h``; 1 in the solid."""
    phi = _check_phi(phi)
    w = n_smear * h
    s = np.clip(phi / w, -1.0, 1.0)
    chi = 1.0 - 0.5 * (1.0 + s + np.sin(np.pi * s) / np.pi)
    chi = np.where(phi < -w, 1.0, np.where(phi > w, 0.0, chi))
    return np.clip(chi, 0.0, 1.0)


def chi_discontinuous(phi) -> np.ndarray:
    phi = _check_phi(phi)
    return np.where(phi < 0, 1.0, np.where(phi > 0, 0.0, 0.5))


def indicator(phi, h: float, config: IndicatorConfig = IndicatorConfig()) -> np.ndarray:
    if config.kind == "continuous":
        return chi_continuous(phi, h, config.n_smear)
    return chi_discontinuous(phi)


def diffusion_blend(chi_cells, kappa_cells, eta: float, grid: CartesianGrid):
    """Face indicator and the blended coefficient ``kappa (1 - chi) + eta chi`` on faces.

    Both the indicator and ``kappa`` are interpolated to faces before blending.
    Returns ``(chi_faces, blend_faces)``.
    """
    if not eta > 0:
        raise ValueError("penalty parameter eta must be positive")
    kappa_cells = np.broadcast_to(np.asarray(kappa_cells, dtype=float), grid.shape)
    chi_f = cell_to_face(chi_cells, grid)
    kap_f = cell_to_face(kappa_cells, grid)
    blend = tuple(k * (1.0 - c) + eta * c for k, c in zip(kap_f, chi_f))
    return chi_f, blend
