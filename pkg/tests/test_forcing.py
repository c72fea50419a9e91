import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxvp import geometry as geo
from fluxvp.cases import annulus_profile
from fluxvp.forcing import (BoundaryData, ForcingConfig, InterfaceCellSet, extend_g, find_interface_cells,
                            flux_forcing_A, flux_forcing_B, flux_forcing_C, flux_forcing_D, forcing_term,
                            kernel_weight, spread_to_faces, vp_rhs)
from fluxvp.grid import build_grid

C2 = (np.pi, np.pi)


def test_config_validation():
    with pytest.raises(ValueError):
        ForcingConfig("E")
    with pytest.raises(ValueError):
        ForcingConfig("C", n_prop=-1)
    with pytest.raises(ValueError):
        ForcingConfig("D", kernel="gauss")


def test_annulus_profile_values():
    assert annulus_profile(np.pi / 4) == pytest.approx(3.0)
    assert annulus_profile(3 * np.pi / 4) == pytest.approx(1.0)
    assert np.all(annulus_profile(np.array([np.pi, 3.5, 5.0])) == 0)


def test_approach_a_samples_faces():
    g = build_grid(0, 1, 4, 2)
    bx, by = flux_forcing_A(g, lambda x: np.stack([x[..., 0], 2 * x[..., 1]], axis=-1))
    assert np.allclose(bx, g.face_centers(0)[..., 0])
    assert np.allclose(by, 2 * g.face_centers(1)[..., 1])


def test_approach_b_planar():
    g = build_grid(0, 1, 8, 2)
    phi = g.cell_centers[..., 0] - 0.4
    bx, by = flux_forcing_B(phi, 5.0, g)
    assert np.allclose(bx[1:-1], 5.0) and np.all(by == 0)
    # with n = (-1, 0): beta . n = -g
    assert np.allclose(-bx[1:-1], -5.0)
    assert all(np.all(b == 0) for b in flux_forcing_B(phi, 0.0, g))
    with pytest.raises(ValueError):
        flux_forcing_B(phi, lambda x, n: 1.0, g)


def test_approach_b_sphere_inside():
    R = 1.5
    g = build_grid(0, 2 * np.pi, 64, 2)
    s = geo.Sphere(C2, R, fluid_inside=True)
    bx, _ = flux_forcing_B(s.sample(g), -2 * R, g)
    xf = g.face_centers(0)
    i = np.argmin(np.abs(xf[:, 0, 0] - (np.pi + R)))
    j = np.argmin(np.abs(xf[0, :, 1] - np.pi))
    assert bx[i, j] == pytest.approx(2 * R, abs=2 * R * g.h)


def test_approach_c_equals_b_for_constant_g():
    g = build_grid(0, 2 * np.pi, 64, 2)
    s = geo.Sphere(C2, 1.5)
    phi = s.sample(g)
    beta_c, diag = flux_forcing_C(phi, s, BoundaryData(-2.5), g, 2)
    beta_b = flux_forcing_B(phi, -2.5, g)
    cells = find_interface_cells(phi, g, s)
    _, visited = extend_g(cells, np.full(len(cells), -2.5), g, 2)
    assert diag.visited_cells == visited.sum()
    for a, (bc, bb) in enumerate(zip(beta_c, beta_b)):
        both = np.zeros(g.face_shape(a), dtype=bool)
        sl_lo, sl_hi = [slice(None)] * 2, [slice(None)] * 2
        sl_lo[a], sl_hi[a] = slice(None, -1), slice(1, None)
        inner = [slice(None)] * 2
        inner[a] = slice(1, -1)
        both[tuple(inner)] = visited[tuple(sl_lo)] & visited[tuple(sl_hi)]
        assert both.any()
        assert np.array_equal(bc[both], bb[both])


def test_max_modulus_conflict():
    g = build_grid(0, 1, 8, 2)
    # two interface cells either side of cell (4, 4) pushing towards it
    cells = InterfaceCellSet(np.array([[2, 4], [6, 4]]), np.array([[1.0, 0.0], [-1.0, 0.0]]),
                             np.zeros((2, 2)))
    gc, visited = extend_g(cells, np.array([1.0, -3.0]), g, n_prop=2)
    assert gc[4, 4] == -3.0
    assert gc[2, 4] == 1.0 and gc[6, 4] == -3.0  # interface cells keep their own value
    # the first sweeps cells 0..4 of the row, the second 4..7 (the step past the wall is clipped)
    assert visited.sum() == 8 and visited[:, 4].all()
    assert gc[0, 4] == 1.0 and gc[5, 4] == -3.0 and gc[7, 4] == -3.0


def test_planar_propagation_preserves_rows():
    g = build_grid(0, 1, 8, 2)
    phi = g.cell_centers[..., 0] - 0.5
    s = geo.Polygon([(-1, -1), (0.5, -1), (0.5, 2), (-1, 2)])
    cells = find_interface_cells(phi, g)
    data = BoundaryData(lambda x, n: x[..., 1])
    gv = data.g_at(cells.closest, cells.normal)
    gc, visited = extend_g(cells, gv, g, 2)
    y = g.cell_centers[..., 1]
    # interface columns 3 and 4 plus two more on either side
    assert visited[1:7].all() and not visited[0].any() and not visited[7].any()
    assert np.allclose(gc[visited], y[visited])
    assert s(np.array([0.0, 0.5])) < 0


def test_propagation_without_steps():
    g = build_grid(0, 1, 8, 2)
    cells = InterfaceCellSet(np.array([[3, 3]]), np.array([[1.0, 0.0]]), np.zeros((1, 2)))
    gc, visited = extend_g(cells, np.array([2.0]), g, 0)
    assert visited.sum() == 1 and gc[3, 3] == 2.0


def test_propagation_support_is_local():
    g = build_grid(0, 2 * np.pi, 64, 2)
    s = geo.hexagram()
    phi = s.sample(g)
    cells = find_interface_cells(phi, g, s)
    _, visited = extend_g(cells, np.ones(len(cells)), g, 2)
    assert np.all(np.abs(phi[visited]) <= (2 + 1) * g.h * np.sqrt(2))


def test_spline_partition_of_unity():
    rng = np.random.default_rng(0)
    for s in rng.uniform(0, 1, 100):
        r = np.arange(-3, 4) - s
        assert kernel_weight(r).sum() == pytest.approx(1.0, abs=1e-12)
    assert kernel_weight(3.0) == 0.0 and kernel_weight(-3.5) == 0.0
    assert kernel_weight(np.array([0.5, 0.51]), "top_hat").tolist() == [1.0, 0.0]
    with pytest.raises(ValueError):
        kernel_weight(0.0, "cosine")


def test_top_hat_marker_on_face_centre():
    g = build_grid(0, 1, 8, 2)
    xf = g.face_centers(0)[3, 5]
    bx, by = spread_to_faces(xf[None], np.array([[2.0, 0.0]]), g, "top_hat")
    assert bx[3, 5] == 2.0 and np.count_nonzero(bx) == 1


def test_spline_spreading_conserves_total():
    g = build_grid(0, 2 * np.pi, 64, 2)
    rng = np.random.default_rng(1)
    pts = rng.uniform(2, 4, (20, 2))
    vals = rng.normal(size=(20, 2))
    for a, f in enumerate(spread_to_faces(pts, vals, g, "spline6")):
        assert f.sum() == pytest.approx(vals[:, a].sum(), abs=1e-10)


def test_approach_d_marker_count():
    g = build_grid(0, 2 * np.pi, 64, 2)
    s = geo.Sphere(C2, 1.5)
    beta, diag = flux_forcing_D(s, BoundaryData(1.0), g, "spline6")
    assert diag.extra["markers"] >= 2 * np.pi * 1.5 / g.h
    assert all(np.all(np.isfinite(b)) for b in beta)


def test_rhs_examples():
    g = build_grid(0, 1, 8, 2)
    rng = np.random.default_rng(0)
    f = rng.normal(size=g.shape)
    beta = tuple(rng.normal(size=g.face_shape(a)) for a in range(2))
    assert np.array_equal(vp_rhs(f, np.zeros(g.shape), beta, g), f)
    const = tuple(np.full(g.face_shape(a), 1.7) for a in range(2))
    assert np.allclose(vp_rhs(f, np.ones(g.shape), const, g), 0, atol=1e-12)
    lin = (g.face_centers(0)[..., 0], np.zeros(g.face_shape(1)))
    assert np.allclose(vp_rhs(f, np.ones(g.shape), lin, g), 0, atol=1e-12)


@given(st.integers(0, 2**31))
def test_forcing_vanishes_where_chi_is_flat(seed):
    rng = np.random.default_rng(seed)
    g = build_grid(0, 1, 10, 2)
    chi = np.zeros(g.shape)
    chi[: rng.integers(2, 8)] = 1.0
    chi[rng.integers(0, 10), rng.integers(0, 10)] = rng.random()
    beta = tuple(rng.normal(size=g.face_shape(a)) for a in range(2))
    s = forcing_term(chi, beta, g)
    pad = np.pad(chi, 1, mode="edge")
    flat = np.ones(g.shape, dtype=bool)
    for di, dj in ((0, 1), (2, 1), (1, 0), (1, 2)):
        flat &= pad[di:di + 10, dj:dj + 10] == chi
    assert np.allclose(s[flat], 0, atol=1e-12)
    # interior cells: the forcing is the two-face average of beta . grad(chi)
    ref = np.zeros(g.shape)
    for a, b in enumerate(beta):
        dchi = np.diff(chi, axis=a) / g.h
        b_in = b[1:-1] if a == 0 else b[:, 1:-1]
        w = b_in * dchi / 2
        if a == 0:
            ref[:-1] += w
            ref[1:] += w
        else:
            ref[:, :-1] += w
            ref[:, 1:] += w
    assert np.allclose(s[1:-1, 1:-1], ref[1:-1, 1:-1], atol=1e-12)
