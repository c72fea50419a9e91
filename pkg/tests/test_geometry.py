import numpy as np
import pytest
from scipy.spatial import Delaunay

from fluxvp import geometry as geo
from fluxvp.forcing import find_interface_cells
from fluxvp.grid import build_grid, face_difference

C2 = (np.pi, np.pi)
C3 = (np.pi, np.pi, np.pi)
SQUARE = [(-1, -1), (1, -1), (1, 1), (-1, 1)]


def test_annulus_examples():
    a = geo.Annulus(C2, np.pi / 4, 3 * np.pi / 4)
    assert a(np.array([np.pi + np.pi / 2, np.pi])) == pytest.approx(np.pi / 4)
    assert a(np.array(C2)) == pytest.approx(-np.pi / 4)
    assert a(np.array([np.pi, np.pi + 3 * np.pi / 4])) == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValueError):
        geo.Annulus(C2, 1.0, 0.5)


def test_sphere_examples():
    R = 1.5
    inside, outside = geo.Sphere(C3, R, fluid_inside=True), geo.Sphere(C3, R)
    assert inside(np.array(C3)) == pytest.approx(R)
    assert outside(np.array(C3)) == pytest.approx(-R)
    assert outside(np.array(C3) + [2 * R, 0, 0]) == pytest.approx(R)


def test_torus_examples():
    t = geo.Torus(C3, 1.0, 0.5)
    assert t(np.array(C3) + [1.5, 0, 0]) == pytest.approx(0, abs=1e-15)
    assert t(np.array(C3) + [0, 1.0, 0]) == pytest.approx(-0.5)
    assert t(np.array(C3)) == pytest.approx(0.5)


def test_polygon_examples():
    sq = geo.Polygon(SQUARE)
    assert sq(np.array([0.0, 0.0])) == pytest.approx(-1)
    assert sq(np.array([2.0, 0.0])) == pytest.approx(1)
    assert sq(np.array([2.0, 2.0])) == pytest.approx(np.sqrt(2))
    # clockwise input is reoriented
    assert geo.Polygon(SQUARE[::-1])(np.array([0.0, 0.0])) == pytest.approx(-1)


def test_polygon_rejects_bad_input():
    with pytest.raises(ValueError):
        geo.Polygon([(0, 0), (1, 1), (1, 0), (0, 1)])  # bow tie
    with pytest.raises(ValueError):
        geo.Polygon([(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        geo.Polygon([(0, 0), (1, 0), (2, 0)])


def test_rounded_polygon_stays_inside_sharp_one():
    sharp, rounded = geo.hexagram(), geo.rounded_hexagram()
    x = np.random.default_rng(0).uniform(0, 2 * np.pi, (5000, 2))
    assert np.all(rounded(x) >= sharp(x) - 1e-12)
    # far from corners the two agree: edge midpoints lie on both boundaries
    pts, _ = sharp.boundary_points(0.05)
    far = np.min(np.linalg.norm(pts[:, None] - sharp.vertices[None], axis=-1), axis=1) > 0.3
    assert far.sum() > 20
    assert np.max(np.abs(rounded(pts[far]))) < 1e-12


def test_egg_examples():
    egg = geo.Egg(C2)
    assert egg(np.array(C2)) < 0
    pts, nrm = egg.boundary_points(1e-3)
    assert np.max(np.abs(egg(pts))) <= 1e-6
    assert np.allclose(np.linalg.norm(nrm, axis=1), 1)
    # far points: compare with distance to a dense boundary sampling
    far = np.array(C2) + 40 * np.array([[1, 0], [0, 1], [-1, -1], [0.3, -1]])
    ref = np.min(np.linalg.norm(far[:, None] - pts[None], axis=-1), axis=1)
    assert np.allclose(egg(far), ref, rtol=1e-2)


def _winding_inside(v, x):
    """Independent point-in-polygon test by summed turning angle."""
    d = v[None, :, :] - x[:, None, :]
    e = np.roll(d, -1, axis=1)
    ang = np.arctan2(d[..., 0] * e[..., 1] - d[..., 1] * e[..., 0], np.sum(d * e, axis=-1))
    return np.abs(ang.sum(axis=1)) > np.pi


@pytest.mark.parametrize("shape", ["hexagram", "xcross", "egg", "annulus", "circle", "torus", "sphere"])
def test_sign_matches_independent_inside_test(shape):
    rng = np.random.default_rng(5)
    dim = 3 if shape in ("torus", "sphere") else 2
    x = rng.uniform(0, 2 * np.pi, (10_000, dim))
    if shape == "hexagram":
        s = geo.hexagram()
        solid = _winding_inside(s.vertices, x)
    elif shape == "xcross":
        s = geo.xcross()
        solid = _winding_inside(s.vertices, x)
    elif shape == "egg":
        s = geo.Egg(C2)
        pts, _ = s.boundary_points(1e-3)
        solid = Delaunay(pts).find_simplex(x) >= 0
    elif shape == "annulus":
        s = geo.Annulus(C2, np.pi / 4, 3 * np.pi / 4)
        r = np.linalg.norm(x - C2, axis=1)
        solid = (r < np.pi / 4) | (r > 3 * np.pi / 4)
    elif shape == "circle":
        s = geo.Sphere(C2, 1.5)
        solid = np.sum((x - C2) ** 2, axis=1) < 1.5**2
    elif shape == "torus":
        s = geo.Torus(C3, 1.0, 0.5)
        p = x - C3
        solid = (np.hypot(p[:, 0], p[:, 1]) - 1.0) ** 2 + p[:, 2] ** 2 < 0.25
    else:
        s = geo.Sphere(C3, 1.5, fluid_inside=True)
        solid = np.sum((x - C3) ** 2, axis=1) > 1.5**2
    phi = s(x)
    clear = np.abs(phi) > 1e-3
    assert np.array_equal((phi < 0)[clear], solid[clear])


@pytest.mark.parametrize("sdf,radius", [
    (geo.Sphere(C2, 1.5), 1.5),
    (geo.Sphere(C3, 1.5, fluid_inside=True), 1.5),
    (geo.Torus(C3, 1.0, 0.5), 0.5),
])
def test_unit_gradient_analytic(sdf, radius):
    rng = np.random.default_rng(2)
    x = rng.uniform(0.5, 2 * np.pi - 0.5, (500, sdf.dim))
    phi = sdf(x)
    x = x[np.abs(phi) < 0.8 * radius]  # stay clear of the medial axis
    assert np.allclose(np.linalg.norm(sdf.gradient(x), axis=1), 1, atol=1e-6)
    assert np.allclose(np.linalg.norm(sdf.normal(x), axis=1), 1, atol=1e-6)


def test_unit_gradient_polygon_away_from_corners():
    s = geo.hexagram()
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 2 * np.pi, (2000, 2))
    away = np.min(np.linalg.norm(x[:, None] - s.vertices[None], axis=-1), axis=1) > 0.3
    x = x[away & (np.abs(s(x)) < 0.1)]
    assert np.allclose(np.linalg.norm(s.gradient(x), axis=1), 1, atol=1e-2)


def test_face_gradient_examples():
    g = build_grid(0, 1, 8, 2)
    gx, gy = face_difference(g.cell_centers[..., 0], g)
    assert np.allclose(gx[1:-1], 1) and np.all(gy == 0)
    assert all(np.all(f == 0) for f in face_difference(np.full(g.shape, 2.0), g))


def test_face_gradient_of_cone():
    g = build_grid(0, 2 * np.pi, 64, 2)
    r = geo.Sphere(C2, 1e-9)(g.cell_centers)
    fx, fy = face_difference(r, g)
    cy = np.gradient(r, g.h, axis=1)
    # face x-gradient with the tangential part averaged from the two cells
    mag = np.sqrt(fx[1:-1] ** 2 + (0.5 * (cy[1:] + cy[:-1])) ** 2)
    xf = g.face_centers(0)[1:-1]
    away = np.linalg.norm(xf - C2, axis=-1) > 3 * g.h
    assert np.max(np.abs(mag[away] - 1)) <= 5 * g.h


def test_interface_cells_planar():
    g = build_grid(0, 1, 8, 2)
    x0 = 3 * g.h  # on the face between columns 2 and 3
    cells = find_interface_cells(g.cell_centers[..., 0] - x0, g)
    assert sorted(set(cells.index[:, 0].tolist())) == [2, 3]
    assert len(cells) == 16
    assert np.allclose(cells.normal, [-1, 0])
    assert np.allclose(cells.closest[:, 0], x0)


def test_interface_cells_circle():
    g = build_grid(0, 2 * np.pi, 64, 2)
    s = geo.Sphere(C2, 1.5)
    cells = find_interface_cells(s.sample(g), g, s)
    expect = 2 * np.pi * 1.5 / g.h * 2
    assert 0.8 * expect <= len(cells) <= 1.6 * expect
    assert np.max(np.abs(s(cells.closest))) <= 1e-6
    # projecting again barely moves the point
    again = cells.closest + s(cells.closest)[:, None] * s.normal(cells.closest)
    assert np.max(np.linalg.norm(again - cells.closest, axis=1)) <= 1e-6
    # every flagged cell straddles the interface or sits within h/2 of it
    phi = s.sample(g)
    for i, j in cells.index:
        nb = [phi[a, b] for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1))]
        assert abs(phi[i, j]) <= g.h / 2 or any(np.sign(v) != np.sign(phi[i, j]) for v in nb)


def test_interface_cells_discrete_normals_and_skips():
    g = build_grid(0, 2 * np.pi, 32, 2)
    s = geo.Sphere(C2, 1.5)
    with_sdf = find_interface_cells(s.sample(g), g, s)
    discrete = find_interface_cells(s.sample(g), g)
    assert np.array_equal(with_sdf.index, discrete.index)
    assert np.max(np.linalg.norm(with_sdf.normal - discrete.normal, axis=1)) < 0.05
    flat = np.zeros(g.shape)  # every cell on the level set, zero gradient
    cells = find_interface_cells(flat, g)
    assert len(cells) == 0 and cells.skipped == g.size


def test_rounded_polygon_boundary_sampler():
    s = geo.rounded_hexagram()
    pts, nrm = s.boundary_points(0.05)
    assert len(pts) > 100
    assert np.max(np.abs(s(pts))) <= 1e-9
    assert np.allclose(np.linalg.norm(nrm, axis=1), 1)
    # every part of the outline is covered: dense probes on the zero set sit near a sample
    probe, _ = s.boundary_points(0.005)
    gap = np.min(np.linalg.norm(probe[:, None] - pts[None], axis=-1), axis=1)
    assert gap.max() < 0.15
