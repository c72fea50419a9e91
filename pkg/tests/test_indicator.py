import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxvp.grid import build_grid
from fluxvp.indicator import IndicatorConfig, chi_continuous, chi_discontinuous, diffusion_blend, indicator


def test_continuous_examples():
    h = 0.1
    assert chi_continuous(-2 * h, h, 1.0) == 1.0
    assert chi_continuous(0.0, h, 1.0) == pytest.approx(0.5)
    assert chi_continuous(-h / 2, h, 1.0) == pytest.approx(1 - 0.5 * (0.5 - 1 / np.pi))
    assert chi_continuous(3 * h, h, 1.0) == 0.0


def test_discontinuous_examples():
    assert chi_discontinuous(-0.3) == 1.0
    assert chi_discontinuous(0.0) == 0.5
    assert chi_discontinuous(1e-300) == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        IndicatorConfig("tanh")
    with pytest.raises(ValueError):
        IndicatorConfig("continuous", 0.0)
    with pytest.raises(ValueError):
        chi_discontinuous([np.nan])


def test_dispatch():
    phi = np.linspace(-1, 1, 11)
    assert np.array_equal(indicator(phi, 0.1, IndicatorConfig("discontinuous")), chi_discontinuous(phi))
    assert np.array_equal(indicator(phi, 0.1, IndicatorConfig("continuous", 2.0)), chi_continuous(phi, 0.1, 2.0))


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=50), st.floats(0.01, 3))
def test_bounds(phi, n_smear):
    phi = np.array(phi)
    for chi in (chi_continuous(phi, 0.1, n_smear), chi_discontinuous(phi)):
        assert np.all((chi >= 0) & (chi <= 1))


def test_continuous_monotone():
    phi = np.linspace(-0.5, 0.5, 2001)
    chi = chi_continuous(phi, 0.1, 1.5)
    assert np.all(np.diff(chi) <= 1e-15)


def test_continuous_tends_to_sharp():
    phi = np.array([-0.2, -0.05, -0.01, 0.01, 0.05, 0.2])
    gaps = [np.max(np.abs(chi_continuous(phi, 0.1, s) - chi_discontinuous(phi))) for s in (1, 0.1, 0.01)]
    assert gaps[-1] == 0.0
    assert gaps[0] >= gaps[1] >= gaps[2]


def test_blend_limits():
    g = build_grid(0, 1, 4, 2)
    _, blend = diffusion_blend(np.zeros(g.shape), 2.0, 1e-8, g)
    assert all(np.all(b == 2.0) for b in blend)
    _, blend = diffusion_blend(np.ones(g.shape), 2.0, 1e-8, g)
    assert all(np.allclose(b, 1e-8, rtol=0, atol=1e-22) for b in blend)
    with pytest.raises(ValueError):
        diffusion_blend(np.zeros(g.shape), 1.0, 0.0, g)


def test_planar_interface_face_gets_half():
    g = build_grid(0, 4, 4, 2)
    phi = g.cell_centers[..., 0] - 2.0  # solid for x < 2
    chi_f, _ = diffusion_blend(chi_discontinuous(phi), 1.0, 1e-8, g)
    assert np.all(chi_f[0][2] == 0.5)
    assert np.all(chi_f[0][1] == 1.0) and np.all(chi_f[0][3] == 0.0)
