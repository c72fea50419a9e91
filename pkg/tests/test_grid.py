import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxvp.grid import build_grid, cell_to_face, face_difference, face_divergence


def test_spacing_examples():
    g = build_grid(0, 2 * np.pi, 2, 2)
    assert g.h == pytest.approx(np.pi)
    assert g.size == 4
    assert build_grid(0, 2 * np.pi, 256).h == pytest.approx(2.45e-2, rel=2e-3)
    g3 = build_grid(0, 2 * np.pi, 64, 3)
    assert g3.h == pytest.approx(9.82e-2, rel=1e-3)
    assert g3.size == 64**3


@pytest.mark.parametrize("lower,upper,n,dim", [(0, 1, 1, 2), (1, 1, 4, 2), (0, 1, 4, 1), (0, np.inf, 4, 2)])
def test_invalid_grids_rejected(lower, upper, n, dim):
    with pytest.raises(ValueError):
        build_grid(lower, upper, n, dim)


def test_coordinates():
    g = build_grid(0, 1, 4, 2)
    c = g.cell_centers
    assert c.shape == (4, 4, 2)
    assert c[1, 2] == pytest.approx([0.375, 0.625])
    f = g.face_centers(0)
    assert f.shape == (5, 4, 2)
    assert f[0, 0] == pytest.approx([0.0, 0.125])
    assert g.cell_index([0.3, 0.99]).tolist() == [1, 3]


def test_cell_to_face_constant_and_midpoint():
    g = build_grid(0, 1, 2, 2)
    for f in cell_to_face(np.full(g.shape, 3.5), g):
        assert np.all(f == 3.5)
    u = np.array([[0.0, 0.0], [2.0, 2.0]])
    fx = cell_to_face(u, g)[0]
    assert fx[1].tolist() == [1.0, 1.0]
    # boundary faces copy the adjacent cell
    assert fx[0].tolist() == [0.0, 0.0] and fx[2].tolist() == [2.0, 2.0]


def test_cell_to_face_quadratic_midpoint():
    g = build_grid(0, 1.0, 10, 2)
    x = g.cell_centers[..., 0]
    fx = cell_to_face(x**2, g)[0][1:-1]
    xf = g.face_centers(0)[1:-1, :, 0]
    assert np.max(np.abs(fx - xf**2)) <= g.h**2 / 4 + 1e-15


def test_cell_to_face_exact_on_linears():
    g = build_grid(-1, 2, 12, 3)
    lin = lambda x: 0.3 * x[..., 0] - 1.2 * x[..., 1] + 2 * x[..., 2] + 0.5
    faces = cell_to_face(lin(g.cell_centers), g)
    for a, f in enumerate(faces):
        inner = [slice(None)] * 3
        inner[a] = slice(1, -1)
        assert np.allclose(f[tuple(inner)], lin(g.face_centers(a))[tuple(inner)], atol=1e-13)


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_cell_to_face_linear_map(alpha, beta, seed):
    g = build_grid(0, 1, 6, 2)
    r = np.random.default_rng(seed)
    u, v = r.normal(size=g.shape), r.normal(size=g.shape)
    lhs = cell_to_face(alpha * u + beta * v, g)
    rhs = [alpha * a + beta * b for a, b in zip(cell_to_face(u, g), cell_to_face(v, g))]
    for x, y in zip(lhs, rhs):
        assert np.allclose(x, y, atol=1e-12)


def test_divergence_of_difference_is_laplacian():
    g = build_grid(0, 1, 8, 2)
    u = np.random.default_rng(0).normal(size=g.shape)
    lap = face_divergence(face_difference(u, g), g)
    i, j = 3, 4
    five = (u[i + 1, j] + u[i - 1, j] + u[i, j + 1] + u[i, j - 1] - 4 * u[i, j]) / g.h**2
    assert lap[i, j] == pytest.approx(five)
