import math
import threading
import warnings

import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from confined_elastica import buckling
from confined_elastica.buckling import (
    DEAD_BAND,
    BucklingInput,
    Regime,
    adhesive_coefficient,
    bare_coefficient,
    bifurcation_lambda,
    decide,
    delta_crit,
    e_lambda,
    e_lambda_min,
    lambda_critical,
    outer_radius,
    printed_adhesive_coefficient,
)
from confined_elastica.closedform import theta


def unit(**kw):
    base = dict(chi_H=1.0, c_stretch=1.0, r_o=1.0, h=0.01)
    base.update(kw)
    return BucklingInput(**base)


def brute_min(lam):
    # dense scan plus polish, independent of the quintic substitution
    s = np.linspace(0.0, 2.0, 200001)
    i = int(np.argmin(e_lambda(s, lam)))
    if i == 0:
        return 0.0, 1.0
    res = scipy.optimize.minimize_scalar(lambda v: e_lambda(v, lam), bounds=(s[i - 1], s[i + 1]), method="bounded",
                                         options={"xatol": 1e-12})
    return (res.x, res.fun) if res.fun < 1.0 else (0.0, 1.0)


# -- e_lambda -----------------------------------------------------------------

def test_lambda_zero():
    assert e_lambda_min(0.0) == pytest.approx((1.0, 0.0), abs=1e-14)


def test_lambda_one():
    assert e_lambda(0.0, 1.0) == 1.0
    assert e_lambda(1.0, 1.0) == 1.0
    s, e = e_lambda_min(1.0)
    assert e < 1.0
    assert s not in (0.0, 1.0)
    assert 0.0 < s < 1.0


def test_lambda_two():
    assert e_lambda_min(2.0) == (0.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(lam=st.floats(0.0, 3.0))
def test_matches_brute_force(lam):
    s, e = e_lambda_min(lam)
    sb, eb = brute_min(lam)
    assert e == pytest.approx(eb, abs=1e-9)
    assert e <= 1.0
    if s > 0:
        assert abs(2 * (s - 1) + (lam / 3) * s ** (-2 / 3)) <= 1e-8


def test_min_value_nondecreasing():
    values = [e_lambda_min(lam)[1] for lam in np.linspace(0.0, 3.0, 100)]
    assert np.all(np.diff(values) >= -1e-14)


def test_negative_lambda_rejected():
    with pytest.raises(ValueError):
        e_lambda_min(-0.1)


# -- lambda0 ------------------------------------------------------------------

def test_lambda_critical_bracket():
    lam0 = lambda_critical()
    assert 1.0341 < lam0 < 1.0342


def test_lambda_critical_closed_form():
    # at the switch the interior minimum ties with e(0) = 1; the tie solves in
    # closed form to lam0 = (6/5)(4/5)^(2/3)
    assert lambda_critical() == pytest.approx(1.2 * 0.8 ** (2 / 3), abs=1e-12)


def test_lambda_critical_defining_property():
    lam0 = lambda_critical()
    assert e_lambda_min(lam0 - 1e-3)[0] > 0.0
    assert e_lambda_min(lam0 + 1e-3)[0] == 0.0


def test_lambda_critical_thread_safe():
    buckling._lambda0 = None
    out = []
    threads = [threading.Thread(target=lambda: out.append(lambda_critical())) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(out)) == 1


# -- outer radius -------------------------------------------------------------

def test_outer_radius_vanishing_penalty():
    assert outer_radius(1.0, 1e-8) == pytest.approx(1.0, abs=1e-5)


def test_outer_radius_bracket_and_stationarity():
    eps = 0.01
    r = outer_radius(1.0, eps)
    assert 1.0 < r < 1.0 + 2 * math.pi**2 * eps
    assert abs(2 * (r - 1.0) - 4 * math.pi**2 * eps / r**2) <= 1e-10
    ref = scipy.optimize.brentq(lambda x: 2 * (x - 1) - 4 * math.pi**2 * eps / x**2, 1.0, 2.0, xtol=1e-15)
    assert r == pytest.approx(ref, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(L=st.floats(0.1, 10.0), eps=st.floats(1e-6, 1.0))
def test_outer_radius_is_global_minimum(L, eps):
    r = outer_radius(L, eps)
    energy = lambda x: (x - L) ** 2 + 4 * math.pi**2 * eps / x
    grid = np.linspace(0.05 * L, 3 * L + 10 * eps, 2001)
    assert energy(r) <= min(energy(grid)) + 1e-12 * energy(r)


def test_outer_radius_rejects_nonpositive():
    with pytest.raises(ValueError):
        outer_radius(0.0, 0.1)


# -- thresholds ---------------------------------------------------------------

def test_coefficients():
    assert 33.4 <= bare_coefficient() <= 33.9
    assert bare_coefficient() == pytest.approx((theta() * math.pi**2 / lambda_critical()) ** 0.6, rel=1e-15)
    assert 12.55 <= printed_adhesive_coefficient() <= 12.68
    assert printed_adhesive_coefficient() == pytest.approx(12.61, rel=5e-3)


def test_adhesive_coefficients_differ_by_known_factor():
    ratio = adhesive_coefficient() / printed_adhesive_coefficient()
    assert ratio == pytest.approx((1.5 / lambda_critical()) ** 0.2, rel=1e-14)


def test_bare_threshold():
    value = delta_crit(unit())
    assert value == pytest.approx(33.62 * 0.01**1.2, rel=5e-3)
    assert value == pytest.approx(0.1338, rel=5e-3)


def test_threshold_power_law_in_h():
    ratio = delta_crit(unit(h=0.02)) / delta_crit(unit(h=0.01))
    assert ratio == pytest.approx(2**1.2, rel=1e-10)


def test_adhesive_threshold_scaling():
    alpha, h = 1e-3, 0.01
    with pytest.warns(UserWarning):
        value = delta_crit(unit(alpha_adh=alpha, h=h))
    assert value == pytest.approx(adhesive_coefficient() * (alpha * h) ** 0.4, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(chi=st.floats(0.1, 10), c=st.floats(0.1, 10), r=st.floats(0.5, 5), h=st.floats(1e-4, 1e-2))
def test_bare_threshold_exponents(chi, c, r, h):
    got = delta_crit(BucklingInput(chi, c, r, h))
    want = bare_coefficient() * chi**0.6 * c**-0.6 * r**-1.4 * h**1.2
    assert got == pytest.approx(want, rel=1e-12)


def test_adhesive_threshold_warns_out_of_regime():
    with pytest.warns(UserWarning):
        delta_crit(unit(alpha_adh=10.0, h=0.01))


def test_thick_shell_warns():
    with pytest.warns(UserWarning):
        unit(h=0.2)


@pytest.mark.parametrize("field, value", [("chi_H", 0.0), ("h", -1.0), ("alpha_adh", -1e-3), ("delta", math.nan)])
def test_input_validation(field, value):
    with pytest.raises(ValueError):
        unit(**{field: value})


# -- decisions ----------------------------------------------------------------

def test_compress_far_below_threshold():
    out = decide(unit(delta=1e-3))
    assert out.lam > lambda_critical() + DEAD_BAND
    assert out.regime is Regime.COMPRESS
    assert out.t_star == 0.0


def test_buckle_far_above_threshold():
    out = decide(unit(delta=1.0))
    assert out.regime is Regime.BUCKLE
    assert out.t_star > 0.0
    assert out.t_star == pytest.approx(out.s_star * 1.0)


def test_boundary_band_at_threshold():
    inp = unit()
    out = decide(unit(delta=delta_crit(inp)))
    assert out.regime is Regime.BOUNDARY_BAND
    assert out.lam == pytest.approx(lambda_critical(), abs=1e-12)


def test_zero_delta_rejected():
    with pytest.raises(ValueError):
        decide(unit(delta=0.0))
    with pytest.raises(ValueError):
        bifurcation_lambda(unit(delta=0.0))


@st.composite
def inputs(draw):
    log = lambda lo, hi: float(np.exp(draw(st.floats(lo, hi))))
    alpha = draw(st.sampled_from([0.0, None]))
    return BucklingInput(
        chi_H=log(-2, 2), c_stretch=log(-2, 2), r_o=log(-1, 1), h=log(-7, -4),
        alpha_adh=alpha if alpha == 0.0 else log(-8, -2), delta=log(-8, 0),
    )


@settings(max_examples=100, deadline=None)
@given(inp=inputs())
def test_decision_consistency(inp):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = decide(inp)
        threshold = delta_crit(inp)
    s, e = e_lambda_min(out.lam)
    assert e <= 1.0
    if out.regime is Regime.BOUNDARY_BAND:
        return
    assert (out.regime is Regime.BUCKLE) == (inp.delta > threshold)
    if out.regime is Regime.COMPRESS:
        assert (s, e) == (0.0, 1.0)
