"""Signed distance functions for the embedded interfaces.

Convention: ``phi > 0`` in the fluid, ``phi < 0`` in the solid, so the unit
normal ``n = -grad(phi)`` points out of the fluid into the solid.  Every SDF is
callable on points of shape ``(..., dim)``.
"""
from __future__ import annotations

import numpy as np

from .grid import CartesianGrid


class SignedDistance:
    dim: int = 2

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def sample(self, grid: CartesianGrid) -> np.ndarray:
        if grid.dim != self.dim:
            raise ValueError(f"{type(self).__name__} is {self.dim}D, grid is {grid.dim}D")
        return self(grid.cell_centers)

    def gradient(self, x, step: float = 1e-6) -> np.ndarray:
        """Central-difference gradient of the closure (exact SDFs have |grad| = 1 a.e.)."""
        x = np.asarray(x, dtype=float)
        g = np.empty(x.shape)
        for a in range(self.dim):
            e = np.zeros(self.dim)
            e[a] = step
            g[..., a] = (self(x + e) - self(x - e)) / (2 * step)
        return g

    def normal(self, x) -> np.ndarray:
        """Unit normal ``-grad(phi)/|grad(phi)|`` pointing from fluid into solid."""
        g = self.gradient(x)
        mag = np.linalg.norm(g, axis=-1, keepdims=True)
        return -g / np.where(mag > 1e-12, mag, 1.0)

    def boundary_points(self, spacing: float):
        """Points on the zero level set about ``spacing`` apart and their normals."""
        raise NotImplementedError(f"no boundary sampler for {type(self).__name__}")


class Sphere(SignedDistance):
    """Circle (2D) or sphere (3D); ``fluid_inside`` picks which side is fluid."""

    def __init__(self, center, radius: float, fluid_inside: bool = False):
        self.center = np.asarray(center, dtype=float)
        self.dim = self.center.size
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.fluid_inside = fluid_inside

    def __call__(self, x):
        r = np.linalg.norm(np.asarray(x, dtype=float) - self.center, axis=-1)
        return self.radius - r if self.fluid_inside else r - self.radius

    def gradient(self, x, step=None):
        d = np.asarray(x, dtype=float) - self.center
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        g = d / np.where(r > 0, r, 1.0)
        return -g if self.fluid_inside else g

    def boundary_points(self, spacing):
        R = self.radius
        if self.dim == 2:
            m = max(8, int(np.ceil(2 * np.pi * R / spacing)))
            t = 2 * np.pi * np.arange(m) / m
            u = np.stack([np.cos(t), np.sin(t)], axis=-1)
        else:
            m = max(20, int(np.ceil(4 * np.pi * R**2 / spacing**2)))
            k = np.arange(m) + 0.5
            z = 1 - 2 * k / m
            t = np.pi * (1 + 5**0.5) * k
            s = np.sqrt(1 - z**2)
            u = np.stack([s * np.cos(t), s * np.sin(t), z], axis=-1)
        pts = self.center + R * u
        # n points into the solid
        return pts, (u if self.fluid_inside else -u)


class Annulus(SignedDistance):
    """Fluid between two concentric circles: ``phi = min(r - r_inner, r_outer - r)``."""

    def __init__(self, center, r_inner: float, r_outer: float):
        if not 0 < r_inner < r_outer:
            raise ValueError("need 0 < r_inner < r_outer")
        self.inner = Sphere(center, r_inner, fluid_inside=False)
        self.outer = Sphere(center, r_outer, fluid_inside=True)
        self.dim = self.inner.dim

    def __call__(self, x):
        return np.minimum(self.inner(x), self.outer(x))

    def boundary_points(self, spacing):
        p1, n1 = self.inner.boundary_points(spacing)
        p2, n2 = self.outer.boundary_points(spacing)
        return np.concatenate([p1, p2]), np.concatenate([n1, n2])


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return any(
        o == 0 and on_seg(a, b, c)
        for o, a, b, c in ((o1, p1, p2, q1), (o2, p1, p2, q2), (o3, q1, q2, p1), (o4, q1, q2, p2))
    )


class Polygon(SignedDistance):
    """Closed simple polygon with the solid inside.  Vertices may be in either orientation."""

    dim = 2

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least three 2D vertices")
        area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if abs(area2) < 1e-14:
            raise ValueError("degenerate polygon")
        if area2 < 0:
            v = v[::-1].copy()
        m = len(v)
        for i in range(m):
            for j in range(i + 1, m):
                if j == i + 1 or (i == 0 and j == m - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                    raise ValueError(f"polygon edges {i} and {j} intersect")
        self.vertices = v  # counter-clockwise

    def _unsigned_and_inside(self, x):
        x = np.asarray(x, dtype=float)
        px, py = x[..., 0], x[..., 1]
        d2 = np.full(px.shape, np.inf)
        inside = np.zeros(px.shape, dtype=bool)
        v = self.vertices
        for a, b in zip(v, np.roll(v, -1, axis=0)):
            e = b - a
            t = np.clip(((px - a[0]) * e[0] + (py - a[1]) * e[1]) / (e @ e), 0.0, 1.0)
            dx, dy = px - (a[0] + t * e[0]), py - (a[1] + t * e[1])
            d2 = np.minimum(d2, dx * dx + dy * dy)
            # crossing number
            cond = (a[1] > py) != (b[1] > py)
            with np.errstate(divide="ignore", invalid="ignore"):
                xc = a[0] + (py - a[1]) * e[0] / e[1]
            inside ^= cond & (px < xc)
        return np.sqrt(d2), inside

    def __call__(self, x):
        d, inside = self._unsigned_and_inside(x)
        return np.where(inside, -d, d)

    def boundary_points(self, spacing):
        pts, nrm = [], []
        v = self.vertices
        for a, b in zip(v, np.roll(v, -1, axis=0)):
            e = b - a
            L = np.linalg.norm(e)
            m = max(1, int(np.ceil(L / spacing)))
            t = (np.arange(m) + 0.5) / m
            pts.append(a + t[:, None] * e)
            # left normal of a CCW edge points into the polygon (solid)
            nrm.append(np.tile(np.array([-e[1], e[0]]) / L, (m, 1)))
        return np.concatenate(pts), np.concatenate(nrm)


def inset_polygon(vertices, distance: float) -> np.ndarray:
    """Mitred inward offset of a polygon by ``distance``."""
    v = Polygon(vertices).vertices
    e = np.roll(v, -1, axis=0) - v
    n_in = np.stack([-e[:, 1], e[:, 0]], axis=-1) / np.linalg.norm(e, axis=1, keepdims=True)
    c = np.sum(n_in * v, axis=1) + distance  # offset line: n_in . p = c
    out = np.empty_like(v)
    for i in range(len(v)):
        A = np.array([n_in[i - 1], n_in[i]])
        out[i] = np.linalg.solve(A, [c[i - 1], c[i]])
    return out


class RoundedPolygon(SignedDistance):
    """Polygon whose convex corners are rounded with radius ``radius``.

    Built as the inward offset polygon dilated back by ``radius``:
    ``phi = phi_inset - radius``.  Concave corners stay sharp.
    """

    dim = 2

    def __init__(self, vertices, radius: float):
        if radius <= 0:
            raise ValueError("rounding radius must be positive")
        self.radius = float(radius)
        self.inset = Polygon(inset_polygon(vertices, radius))

    def __call__(self, x):
        return self.inset(x) - self.radius

    def boundary_points(self, spacing):
        # offset the inset outline outward, add corner arcs, keep what lands on the zero set
        pts, nrm = self.inset.boundary_points(spacing)
        cand = [pts - self.radius * nrm]
        m = max(8, int(np.ceil(2 * np.pi * self.radius / spacing)))
        t = 2 * np.pi * np.arange(m) / m
        ring = self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)
        cand += [v + ring for v in self.inset.vertices]
        x = np.concatenate(cand)
        x = x[np.abs(self(x)) <= 1e-9]
        return x, self.normal(x)


class Egg(SignedDistance):
    """Convex hull of two circles (radii ``r_big`` and ``r_small``) joined by tangent segments.

    The big circle sits below the small one along ``axis``; the shape is solid
    and the fluid is outside.
    """

    dim = 2

    def __init__(self, center, r_big: float = 1.2, r_small: float = 0.8, separation: float = 1.2):
        if not (r_big > 0 and r_small > 0 and separation > abs(r_big - r_small)):
            raise ValueError("invalid egg radii/separation")
        self.center = np.asarray(center, dtype=float)
        self.r1, self.r2, self.d = float(r_big), float(r_small), float(separation)
        self.c1 = self.center - np.array([0.0, self.d / 2])
        self.c2 = self.center + np.array([0.0, self.d / 2])
        self.b = (self.r1 - self.r2) / self.d
        self.a = np.sqrt(1 - self.b**2)

    def __call__(self, x):
        p = np.asarray(x, dtype=float) - self.c1
        px, py = np.abs(p[..., 0]), p[..., 1]
        a, b, d = self.a, self.b, self.d
        k = -b * px + a * py
        around_big = np.hypot(px, py) - self.r1
        around_small = np.hypot(px, py - d) - self.r2
        side = a * px + b * py - self.r1
        return np.where(k < 0, around_big, np.where(k > a * d, around_small, side))

    def boundary_points(self, spacing):
        a, b = self.a, self.b
        # tangent direction angle measured from +x; tangent points on each circle
        th = np.arctan2(b, a)  # outward normal of the right tangent segment
        pts, nrm = [], []

        def arc(c, r, t0, t1):
            m = max(2, int(np.ceil(abs(t1 - t0) * r / spacing)))
            t = t0 + (t1 - t0) * (np.arange(m) + 0.5) / m
            u = np.stack([np.cos(t), np.sin(t)], axis=-1)
            pts.append(c + r * u)
            nrm.append(-u)

        # big circle: lower arc from the left tangent point to the right one
        arc(self.c1, self.r1, np.pi - th, 2 * np.pi + th)
        arc(self.c2, self.r2, th, np.pi - th)
        for sgn in (1, -1):
            u = np.array([sgn * np.cos(th), np.sin(th)])
            p0 = self.c1 + self.r1 * u
            p1 = self.c2 + self.r2 * u
            L = np.linalg.norm(p1 - p0)
            m = max(1, int(np.ceil(L / spacing)))
            t = (np.arange(m) + 0.5) / m
            pts.append(p0 + t[:, None] * (p1 - p0))
            nrm.append(np.tile(-u, (m, 1)))
        return np.concatenate(pts), np.concatenate(nrm)


class Torus(SignedDistance):
    """Solid torus with axis along z; fluid outside."""

    dim = 3

    def __init__(self, center, major: float = 1.0, minor: float = 0.5):
        if not 0 < minor < major:
            raise ValueError("need 0 < minor < major")
        self.center = np.asarray(center, dtype=float)
        self.R, self.r = float(major), float(minor)

    def __call__(self, x):
        p = np.asarray(x, dtype=float) - self.center
        q = np.hypot(p[..., 0], p[..., 1]) - self.R
        return np.hypot(q, p[..., 2]) - self.r

    def boundary_points(self, spacing):
        m1 = max(8, int(np.ceil(2 * np.pi * (self.R + self.r) / spacing)))
        m2 = max(8, int(np.ceil(2 * np.pi * self.r / spacing)))
        u, v = np.meshgrid(2 * np.pi * np.arange(m1) / m1, 2 * np.pi * np.arange(m2) / m2, indexing="ij")
        nrm = np.stack([np.cos(v) * np.cos(u), np.cos(v) * np.sin(u), np.sin(v)], axis=-1)
        ring = np.stack([self.R * np.cos(u), self.R * np.sin(u), np.zeros_like(u)], axis=-1)
        pts = self.center + ring + self.r * nrm
        return pts.reshape(-1, 3), -nrm.reshape(-1, 3)


# ---- named shapes used by the verification cases ----

def hexagram_vertices(center=(np.pi, np.pi), circumradius: float = 1.5) -> np.ndarray:
    """Outline of two overlapping equilateral triangles (12 vertices, CCW)."""
    c = np.asarray(center, dtype=float)
    k = np.arange(12)
    ang = np.pi / 2 + k * np.pi / 6
    rad = np.where(k % 2 == 0, circumradius, circumradius / np.sqrt(3))
    return c + rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def xcross_vertices(center=(np.pi, np.pi), half_width: float = 0.4, half_length: float = 1.5) -> np.ndarray:
    """Plus sign rotated by 45 degrees."""
    w, L = half_width, half_length
    plus = np.array([(L, -w), (L, w), (w, w), (w, L), (-w, L), (-w, w),
                     (-L, w), (-L, -w), (-w, -w), (-w, -L), (w, -L), (w, -w)], dtype=float)
    c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
    rot = np.array([[c, -s], [s, c]])
    return np.asarray(center, dtype=float) + plus @ rot.T


def hexagram(center=(np.pi, np.pi), circumradius: float = 1.5) -> Polygon:
    return Polygon(hexagram_vertices(center, circumradius))


def rounded_hexagram(center=(np.pi, np.pi), circumradius: float = 1.5, radius: float = 0.15) -> RoundedPolygon:
    return RoundedPolygon(hexagram_vertices(center, circumradius), radius)


def xcross(center=(np.pi, np.pi), half_width: float = 0.4, half_length: float = 1.5) -> Polygon:
    return Polygon(xcross_vertices(center, half_width, half_length))
