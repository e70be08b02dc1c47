import math

import numpy as np
import pytest
import shapely

from confined_elastica._spiral import smoothstep, spiral_construction
from confined_elastica.core import curve_length_energy
from confined_elastica.disksolver import helix_bending_integral, helix_construction

from conftest import HELIX_ETAS, eta2_coefficient

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="module")
def helix_values():
    return [curve_length_energy(helix_construction(eta)) for eta in HELIX_ETAS]


@pytest.fixture(scope="module")
def spirals():
    return {L: spiral_construction(L) for L in (50, 100, 200, 400)}


# -- helix --------------------------------------------------------------------

def test_helix_inside_ball():
    for eta in np.linspace(0.01, 0.29, 15):
        radii = np.linalg.norm(helix_construction(eta, m=4).points, axis=1)
        assert radii.max() < 1.0


@pytest.mark.parametrize("kw", [dict(eta=0.05, m=2), dict(eta=0.05, m=3.5), dict(eta=0.0), dict(eta=0.3)])
def test_helix_rejects(kw):
    with pytest.raises(ValueError):
        helix_construction(**kw)


def test_helix_length_coefficient(helix_values):
    coef = eta2_coefficient(HELIX_ETAS, [v[0] for v in helix_values], TWO_PI)
    assert coef == pytest.approx(1.25 * math.pi, rel=0.02)


def test_helix_energy_coefficient(helix_values):
    # series of the true elastic energy: (m^4/2 + 1 - 3 m^2/4) pi = 139/4 pi at m = 3
    coef = eta2_coefficient(HELIX_ETAS, [v[1] for v in helix_values], TWO_PI)
    assert coef == pytest.approx(139 / 4 * math.pi, rel=0.02)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_helix_energy_coefficient_general_m(m):
    etas = (0.01, 0.02, 0.03)
    energies = [curve_length_energy(helix_construction(eta, m=m, n=1024))[1] for eta in etas]
    coef = eta2_coefficient(etas, energies, TWO_PI)
    assert coef == pytest.approx((m**4 / 2 + 1 - 0.75 * m**2) * math.pi, rel=1e-3)


def test_helix_parametric_integral():
    values = [helix_bending_integral(eta) for eta in HELIX_ETAS]
    coef = eta2_coefficient(HELIX_ETAS, values, TWO_PI)
    assert coef == pytest.approx(38.5 * math.pi, rel=1e-10)


def test_helix_energy_exceeds_length_bound(helix_values):
    for length, energy in helix_values:
        assert energy >= 4 * math.pi**2 / length


def test_helix_linear_slope(helix_values):
    lengths = np.array([v[0] for v in helix_values])
    energies = np.array([v[1] for v in helix_values])
    slope = np.polyfit(lengths - TWO_PI, energies - TWO_PI, 1)[0]
    assert slope == pytest.approx(139 / 5, rel=0.02)


# -- spiral -------------------------------------------------------------------

def test_smoothstep():
    x = np.linspace(-0.5, 1.5, 2001)
    S, S1, _ = smoothstep(x)
    assert S[0] == 0.0 and S[-1] == 1.0
    assert np.all(np.diff(S) >= 0.0)
    assert smoothstep(0.5)[0] == pytest.approx(0.5)
    h = 1e-6
    xi = np.linspace(0.05, 0.95, 19)
    np.testing.assert_allclose(smoothstep(xi)[1], (smoothstep(xi + h)[0] - smoothstep(xi - h)[0]) / (2 * h),
                               rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(smoothstep(xi)[2], (smoothstep(xi + h)[1] - smoothstep(xi - h)[1]) / (2 * h),
                               rtol=1e-5, atol=1e-6)


def test_spiral_length(spirals):
    for L, res in spirals.items():
        assert res.exact_length == pytest.approx(L, rel=1e-10)
        assert res.length == pytest.approx(L, rel=1e-3)


def test_spiral_energy_agrees_with_exact_derivatives(spirals):
    for res in spirals.values():
        assert res.energy == pytest.approx(res.exact_energy, rel=1e-8)


def test_spiral_embedded_and_confined(spirals):
    for res in spirals.values():
        pts = res.curve.points
        assert np.hypot(pts[:, 0], pts[:, 1]).max() <= 1.0
        assert shapely.LinearRing(pts).is_simple


def test_spiral_energy_above_length(spirals):
    assert spirals[100].energy - 100 > 0


def test_spiral_excess_bounded(spirals):
    scaled = [(res.energy - L) / math.sqrt(L) for L, res in spirals.items()]
    assert min(scaled) > 0
    assert max(scaled) / min(scaled) <= 3


def test_spiral_radius(spirals):
    assert spirals[100].rho == pytest.approx(1 - 2 / math.sqrt(100))


@pytest.mark.parametrize("kw", [dict(L=49.0), dict(L=100.0, c=0.0), dict(L=100.0, c=6.0)])
def test_spiral_rejects(kw):
    with pytest.raises(ValueError):
        spiral_construction(**kw)
