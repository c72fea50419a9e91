import math

import numpy as np
import pytest

from fluxvp import CASES, get_case
from fluxvp.cases import KAPPA, annulus_dqdr, annulus_f, annulus_profile, annulus_q, torus_f, torus_q
from fluxvp.forcing import ForcingConfig
from fluxvp.suite import oracle_manufactured

PI = math.pi
# Robin data on the annulus, frozen after checking against the closed form below
ANNULUS_ROBIN_G = (5.734015003998405, -0.8545292174189957)


def test_catalog():
    assert len(CASES) == 12
    assert CASES["torus"].dim == 3 and CASES["sphere-in"].dim == 3
    assert set(CASES["annulus-neumann"].approaches) == {"A", "B", "C", "D"}
    with pytest.raises(KeyError):
        get_case("square")


def test_annulus_exact_and_source():
    x = np.array([PI + PI / 2, PI])
    ref = math.cos(2 * PI) + 0.75 * PI * math.log(PI / 2) - 3 * PI / 32 * (
        9 * math.log(3 * PI / 4) - math.log(PI / 4) - 4)
    assert annulus_q(x) == pytest.approx(ref, rel=1e-14)
    assert annulus_f(np.array([PI + PI / 4, PI])) == pytest.approx(-16, rel=1e-12)
    assert annulus_profile(PI / 4) == pytest.approx(3.0)
    # fluid-side boundary slopes: 3m on the inner circle, m on the outer
    assert annulus_dqdr(PI / 4) == pytest.approx(3.0)
    assert annulus_dqdr(3 * PI / 4) == pytest.approx(1.0)


def test_annulus_flux_signs():
    inner, outer = get_case("annulus-neumann").interfaces()
    # n points into the solid: -e_r on the inner circle, +e_r on the outer
    assert inner.data.constant == pytest.approx(KAPPA * 3.0)
    assert outer.data.constant == pytest.approx(-KAPPA * 1.0)


def test_annulus_robin_constants():
    case = get_case("annulus-robin")
    assert not case.zero_mean
    g = [i.data.constant for i in case.interfaces()]
    assert all(i.data.zeta == 1.0 for i in case.interfaces())
    q_in = annulus_q(np.array([PI + PI / 4, PI]))
    q_out = annulus_q(np.array([PI + 3 * PI / 4, PI]))
    assert g[0] == pytest.approx(-(q_in - 3.0), rel=1e-12)
    assert g[1] == pytest.approx(-(q_out + 1.0), rel=1e-12)
    assert g == pytest.approx(ANNULUS_ROBIN_G, rel=1e-13)


def test_sinsin_examples():
    case = get_case("hexagram-neumann")
    x = np.array([PI / 2, PI / 2])
    assert case.f(x) == pytest.approx(2.0)
    p = np.array([[0.3, 1.1]])
    n = np.array([[1.0, 0.0]])
    g = case.interfaces()[0].data.g_at(p, n)
    assert g == pytest.approx(-math.cos(0.3) * math.sin(1.1))
    gr = get_case("hexagram-robin").interfaces()[0].data.g_at(p, n)
    assert gr == pytest.approx(-(math.sin(0.3) * math.sin(1.1) + math.cos(0.3) * math.sin(1.1)))


def test_sphere_examples():
    inside, outside = get_case("sphere-in"), get_case("sphere-out")
    c = np.array([PI, PI, PI])
    assert inside.q_exact(c) == pytest.approx(-1.35)
    assert outside.q_exact(c) == pytest.approx(0.0)
    assert np.all(inside.f(np.random.default_rng(0).random((5, 3))) == -6)
    assert inside.interfaces()[0].data.constant == -3.0
    assert outside.interfaces()[0].data.constant == 3.0
    assert inside.zero_mean and not inside.exterior_from_exact
    assert outside.exterior_from_exact


def test_torus_examples():
    assert torus_f(np.zeros(3)) == pytest.approx(-3)
    assert torus_q(np.array([PI, PI, PI])) == pytest.approx(1)


@pytest.mark.parametrize("name", sorted(CASES))
def test_flux_data_matches_directional_derivative(name):
    case = get_case(name)
    step = 1e-5
    for iface in case.interfaces():
        pts, nrm = iface.sdf.boundary_points(0.1)
        idx = np.random.default_rng(0).permutation(len(pts))[:100]
        pts, nrm = pts[idx], nrm[idx]
        dqdn = (case.q_exact(pts + step * nrm) - case.q_exact(pts - step * nrm)) / (2 * step)
        ref = -(iface.data.zeta * case.q_exact(pts) + KAPPA * dqdn)
        assert np.allclose(iface.data.g_at(pts, nrm), ref, atol=1e-6)


def test_manufactured_identity_all_cases():
    worst, tol = oracle_manufactured()
    assert worst <= tol


def test_problem_rejects_unsupported_approach():
    case = get_case("hexagram-neumann")
    with pytest.raises(ValueError):
        case.problem(case.grid(16), forcing=ForcingConfig("B"))
    with pytest.raises(ValueError):
        get_case("torus").problem(case.grid(16))
