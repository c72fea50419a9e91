"""Manufactured-solution verification cases on ``[0, 2 pi]^dim``.

Every case knows its exact solution, forcing, interface geometry and flux data,
and whether the discrete solution must be shifted to zero fluid mean (pure
Neumann problems only fix ``q`` up to a constant).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from .forcing import BoundaryData, ForcingConfig
from .grid import CartesianGrid, build_grid
from .indicator import IndicatorConfig
from .operator import FluxInterface, PenalizedProblem

TWO_PI = 2 * np.pi
CENTER2 = (np.pi, np.pi)
CENTER3 = (np.pi, np.pi, np.pi)
KAPPA = 1.0
ZETA = 1.0


@dataclass
class InterfaceDef:
    sdf: geo.SignedDistance
    data: BoundaryData
    flux: Callable | None = None  # kappa grad(q~) used by approach A


@dataclass
class VerificationCase:
    name: str
    dim: int
    q_exact: Callable
    f: Callable
    build_interfaces: Callable  # () -> list[InterfaceDef]
    bc: str  # "neumann" | "robin"
    approaches: tuple
    exterior_from_exact: bool = True  # False: homogeneous Dirichlet on the box
    zero_mean: bool = False
    grids: tuple = ()
    description: str = ""
    lower: float = 0.0
    upper: float = TWO_PI
    _ifaces: list | None = field(default=None, repr=False)

    def interfaces(self) -> list:
        if self._ifaces is None:
            self._ifaces = self.build_interfaces()
        return self._ifaces

    def grid(self, n: int) -> CartesianGrid:
        return build_grid(self.lower, self.upper, n, self.dim)

    def phi(self, x) -> np.ndarray:
        return np.minimum.reduce([i.sdf(x) for i in self.interfaces()])

    def problem(self, grid: CartesianGrid, indicator: IndicatorConfig = IndicatorConfig(),
                forcing: ForcingConfig = ForcingConfig(), eta: float = 1e-8) -> PenalizedProblem:
        if grid.dim != self.dim:
            raise ValueError(f"case {self.name} is {self.dim}D")
        if forcing.approach not in self.approaches:
            raise ValueError(f"approach {forcing.approach} is not available for {self.name}")
        ifaces = [FluxInterface(i.sdf, i.data, i.flux) for i in self.interfaces()]
        return PenalizedProblem(grid=grid, f=self.f, interfaces=ifaces, kappa=KAPPA, eta=eta,
                                indicator=indicator, forcing=forcing,
                                exterior=self.q_exact if self.exterior_from_exact else None)


# ------------------------------------------------------------------ annulus

R_IN, R_OUT = np.pi / 4, 3 * np.pi / 4
ANNULUS_M = 1.0


def _radius(x, center):
    return np.linalg.norm(np.asarray(x) - np.asarray(center), axis=-1)


def annulus_q(x, m: float = ANNULUS_M):
    r = _radius(x, CENTER2)
    c = -3.0 / 32.0 * m * np.pi * (9 * np.log(3 * np.pi / 4) - np.log(np.pi / 4) - 4)
    return np.cos(4 * r) + 0.75 * m * np.pi * np.log(r) + c


def annulus_dqdr(r, m: float = ANNULUS_M):
    return -4 * np.sin(4 * r) + 0.75 * m * np.pi / r


def annulus_f(x):
    r = _radius(x, CENTER2)
    return 16 * np.cos(4 * r) + 4 * np.sin(4 * r) / r


def annulus_profile(r, m: float = ANNULUS_M):
    """Smooth radial flux profile: 3m at the inner radius, m at the outer, zero beyond pi."""
    r = np.asarray(r, dtype=float)
    v = m * (4 * r / (3 * np.pi)) ** 2 * (4 * (1 - r / np.pi)) ** 3
    return np.where((r >= 0) & (r <= np.pi), v, 0.0)


def _radial_field(profile, center):
    def flux(x):
        d = np.asarray(x, dtype=float) - np.asarray(center)
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        return profile(r) * d / np.where(r > 0, r, 1.0)

    return flux


def _robin_flux(q, grad_q, sdf, zeta):
    """kappa grad(q) - zeta q grad(phi): its normal component is zeta q + kappa dq/dn."""
    def flux(x):
        return KAPPA * grad_q(x) - zeta * q(x)[..., None] * sdf.gradient(x)

    return flux


def _annulus_grad(x):
    d = np.asarray(x, dtype=float) - np.asarray(CENTER2)
    r = np.linalg.norm(d, axis=-1, keepdims=True)
    return annulus_dqdr(r) * d / r


def _annulus_neumann():
    inner = geo.Sphere(CENTER2, R_IN, fluid_inside=False)
    outer = geo.Sphere(CENTER2, R_OUT, fluid_inside=True)
    flux = _radial_field(annulus_profile, CENTER2)
    # n = -e_r on the inner circle and +e_r on the outer; g = -kappa n . grad(q)
    g_in = KAPPA * annulus_dqdr(R_IN)
    g_out = -KAPPA * annulus_dqdr(R_OUT)
    return [InterfaceDef(inner, BoundaryData(g_in), flux), InterfaceDef(outer, BoundaryData(g_out), flux)]


def _annulus_robin():
    inner = geo.Sphere(CENTER2, R_IN, fluid_inside=False)
    outer = geo.Sphere(CENTER2, R_OUT, fluid_inside=True)
    q_in = annulus_q(np.array([CENTER2[0] + R_IN, CENTER2[1]]))
    q_out = annulus_q(np.array([CENTER2[0] + R_OUT, CENTER2[1]]))
    g_in = -(ZETA * q_in - KAPPA * annulus_dqdr(R_IN))
    g_out = -(ZETA * q_out + KAPPA * annulus_dqdr(R_OUT))
    return [InterfaceDef(s, BoundaryData(g, ZETA), _robin_flux(annulus_q, _annulus_grad, s, ZETA))
            for s, g in ((inner, g_in), (outer, g_out))]


# ------------------------------------------------------------------ sin x sin y

def sinsin_q(x):
    return np.sin(x[..., 0]) * np.sin(x[..., 1])


def sinsin_grad(x):
    return np.stack([np.cos(x[..., 0]) * np.sin(x[..., 1]), np.sin(x[..., 0]) * np.cos(x[..., 1])], axis=-1)


def sinsin_f(x):
    return 2 * np.sin(x[..., 0]) * np.sin(x[..., 1])


def neumann_data(grad_q):
    return BoundaryData(lambda x, n: -KAPPA * np.sum(n * grad_q(x), axis=-1))


def robin_data(q, grad_q, zeta=ZETA):
    return BoundaryData(lambda x, n: -(zeta * q(x) + KAPPA * np.sum(n * grad_q(x), axis=-1)), zeta)


def _sinsin(sdf_factory, robin=False):
    def build():
        s = sdf_factory()
        if robin:
            return [InterfaceDef(s, robin_data(sinsin_q, sinsin_grad), _robin_flux(sinsin_q, sinsin_grad, s, ZETA))]
        return [InterfaceDef(s, neumann_data(sinsin_grad), lambda x: KAPPA * sinsin_grad(x))]

    return build


# ------------------------------------------------------------------ 3D

SPHERE_R = 1.5


def _sphere_q(c):
    def q(x):
        return np.sum((np.asarray(x) - np.asarray(CENTER3)) ** 2, axis=-1) + c

    return q


def _sphere_grad(x):
    return 2 * (np.asarray(x, dtype=float) - np.asarray(CENTER3))


def _sphere(fluid_inside):
    def build():
        s = geo.Sphere(CENTER3, SPHERE_R, fluid_inside=fluid_inside)
        # dq/dr = 2R; n = +e_r for fluid inside, -e_r for fluid outside
        g = -2 * SPHERE_R * KAPPA if fluid_inside else 2 * SPHERE_R * KAPPA
        return [InterfaceDef(s, BoundaryData(g), lambda x: KAPPA * _sphere_grad(x))]

    return build


def torus_q(x):
    return -np.cos(x[..., 0]) * np.cos(x[..., 1]) * np.cos(x[..., 2])


def torus_grad(x):
    cx, cy, cz = np.cos(x[..., 0]), np.cos(x[..., 1]), np.cos(x[..., 2])
    sx, sy, sz = np.sin(x[..., 0]), np.sin(x[..., 1]), np.sin(x[..., 2])
    return np.stack([sx * cy * cz, cx * sy * cz, cx * cy * sz], axis=-1)


def torus_f(x):
    return 3 * torus_q(x)


def _torus():
    s = geo.Torus(CENTER3, 1.0, 0.5)
    return [InterfaceDef(s, neumann_data(torus_grad), lambda x: KAPPA * torus_grad(x))]


# ------------------------------------------------------------------ registry

GRIDS_2D = (32, 64, 128, 256)
GRIDS_3D = (16, 32, 64, 128)


def _registry() -> dict:
    c_sphere_in = -3 * SPHERE_R**2 / 5
    cases = [
        VerificationCase("annulus-neumann", 2, annulus_q, annulus_f, _annulus_neumann, "neumann",
                         ("A", "B", "C", "D"), exterior_from_exact=False, zero_mean=True, grids=GRIDS_2D,
                         description="concentric annulus, constant flux on both circles"),
        VerificationCase("annulus-robin", 2, annulus_q, annulus_f, _annulus_robin, "robin",
                         ("A", "B", "C", "D"), exterior_from_exact=False, grids=GRIDS_2D,
                         description="concentric annulus, constant Robin data"),
        VerificationCase("hexagram-neumann", 2, sinsin_q, sinsin_f, _sinsin(geo.hexagram), "neumann",
                         ("A", "C", "D"), grids=GRIDS_2D, description="sharp six-pointed star"),
        VerificationCase("hexagram-robin", 2, sinsin_q, sinsin_f, _sinsin(geo.hexagram, True), "robin",
                         ("A", "C", "D"), grids=GRIDS_2D, description="sharp six-pointed star, Robin"),
        VerificationCase("rounded-hexagram-neumann", 2, sinsin_q, sinsin_f, _sinsin(geo.rounded_hexagram),
                         "neumann", ("A", "C"), grids=GRIDS_2D, description="star with rounded tips"),
        VerificationCase("rounded-hexagram-robin", 2, sinsin_q, sinsin_f, _sinsin(geo.rounded_hexagram, True),
                         "robin", ("A", "C"), grids=GRIDS_2D, description="star with rounded tips, Robin"),
        VerificationCase("egg-neumann", 2, sinsin_q, sinsin_f, _sinsin(lambda: geo.Egg(CENTER2)), "neumann",
                         ("A", "C", "D"), grids=GRIDS_2D, description="two-radius egg"),
        VerificationCase("xcross-neumann", 2, sinsin_q, sinsin_f, _sinsin(geo.xcross), "neumann",
                         ("A", "C", "D"), grids=GRIDS_2D, description="plus sign rotated 45 degrees"),
        VerificationCase("circle-neumann", 2, sinsin_q, sinsin_f,
                         _sinsin(lambda: geo.Sphere(CENTER2, 1.5, fluid_inside=False)), "neumann",
                         ("A", "C", "D"), grids=GRIDS_2D, description="circle, varying flux"),
        VerificationCase("sphere-in", 3, _sphere_q(c_sphere_in), lambda x: np.full(x.shape[:-1], -6.0),
                         _sphere(True), "neumann", ("A", "B", "C", "D"), exterior_from_exact=False,
                         zero_mean=True, grids=GRIDS_3D, description="fluid inside a sphere"),
        VerificationCase("sphere-out", 3, _sphere_q(0.0), lambda x: np.full(x.shape[:-1], -6.0),
                         _sphere(False), "neumann", ("A", "B", "C", "D"), grids=GRIDS_3D,
                         description="fluid outside a sphere"),
        VerificationCase("torus", 3, torus_q, torus_f, _torus, "neumann", ("A", "C", "D"), grids=GRIDS_3D,
                         description="fluid outside a torus, varying flux"),
    ]
    return {c.name: c for c in cases}


CASES = _registry()


def get_case(name: str) -> VerificationCase:
    try:
        return CASES[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; known cases: {', '.join(CASES)}") from None
