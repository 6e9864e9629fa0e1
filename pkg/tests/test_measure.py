import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from finrange.domain import QUASILINEAR, Bundle, PreferenceFamily, PreferenceInterval
from finrange.errors import OutOfIntervalError
from finrange.measure import ParamMeasure, adaptive_simpson, expected_revenue
from finrange.mechanism import piecewise, posted_price, quadratic_sp, step_from_menu, zero_mechanism


def test_mass_examples(unit, iv):
    u = ParamMeasure.uniform(unit)
    assert u.mass(0.25, 0.75) == pytest.approx(0.5, abs=1e-15)
    assert u.mass(0.3, 0.3) == 0.0
    assert ParamMeasure.uniform(iv).mass(0.01, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert ParamMeasure.power(unit, 2.0).mass(0.0, 0.5) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(OutOfIntervalError):
        u.mass(0.5, 1.5)
    with pytest.raises(OutOfIntervalError):
        u.mass(0.6, 0.5)


def test_piecewise_linear_knots(unit):
    m = ParamMeasure.piecewise_linear(unit, [(0.5, 0.8)])
    assert m.knots == ((0.0, 0.0), (0.5, 0.8), (1.0, 1.0))
    assert m.mass(0.0, 0.25) == pytest.approx(0.4, abs=1e-15)
    assert m.mass(0.5, 1.0) == pytest.approx(0.2, abs=1e-15)
    assert m.quantile(0.4) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        ParamMeasure.piecewise_linear(unit, [(0.5, 0.8), (0.4, 0.9)])
    with pytest.raises(ValueError):
        ParamMeasure.power(unit, 0.0)


MEASURES = st.sampled_from(["uniform", "power_half", "power_3", "pwl"])


def make_measure(name, iv):
    if name == "uniform":
        return ParamMeasure.uniform(iv)
    if name == "power_half":
        return ParamMeasure.power(iv, 0.5)
    if name == "power_3":
        return ParamMeasure.power(iv, 3.0)
    return ParamMeasure.piecewise_linear(iv, [(0.3, 0.1), (0.7, 0.75)])


@settings(max_examples=200, deadline=None)
@given(name=MEASURES, pts=st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3))
def test_mass_additive(name, pts):
    m = make_measure(name, PreferenceInterval(QUASILINEAR, 0.0, 1.0))
    a, b, c = sorted(pts)
    assert m.mass(a, c) == pytest.approx(m.mass(a, b) + m.mass(b, c), abs=1e-14)
    assert 0.0 <= m.mass(a, c) <= 1.0


@settings(max_examples=100, deadline=None)
@given(name=MEASURES, u=st.floats(0.0, 1.0))
def test_quantile_inverts_cdf(name, u):
    m = make_measure(name, PreferenceInterval(QUASILINEAR, 0.0, 1.0))
    assert m.cdf(m.quantile(u)) == pytest.approx(u, abs=1e-12)


def test_adaptive_simpson_matches_closed_forms():
    assert adaptive_simpson(np.sin, 0.0, np.pi, 1e-12) == pytest.approx(2.0, abs=1e-10)
    assert adaptive_simpson(np.sqrt, 0.0, 1.0, 1e-10) == pytest.approx(2.0 / 3.0, abs=1e-8)


def test_expected_revenue_examples(unit):
    u = ParamMeasure.uniform(unit)
    assert expected_revenue(posted_price(0.5, unit), u) == pytest.approx(0.25, abs=1e-9)
    assert expected_revenue(quadratic_sp(unit), u) == pytest.approx(1.0 / 6.0, abs=1e-9)
    assert expected_revenue(zero_mechanism(unit), u) == 0.0


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0, 3.5])
def test_power_closed_forms(unit, gamma):
    m = ParamMeasure.power(unit, gamma)
    # E[theta^2] = gamma / (gamma + 2) for CDF x^gamma on [0, 1]
    assert expected_revenue(quadratic_sp(unit), m) == pytest.approx(gamma / (2.0 * (gamma + 2.0)), abs=1e-9)
    for p in (0.2, 0.5, 0.9):
        assert expected_revenue(posted_price(p, unit), m) == pytest.approx(p * (1.0 - p**gamma), abs=1e-9)


def test_piecewise_linear_posted_price(unit):
    m = ParamMeasure.piecewise_linear(unit, [(0.3, 0.1), (0.7, 0.75)])
    for p in (0.2, 0.3, 0.5, 0.8):
        assert expected_revenue(posted_price(p, unit), m) == pytest.approx(p * (1.0 - float(m.cdf(p))), abs=1e-12)


@pytest.mark.parametrize("name", ["uniform", "power_half", "power_3", "pwl"])
def test_matches_scipy_quad(iv, name):
    m = make_measure(name, iv)
    F = quadratic_sp(iv)
    lo, w = iv.low, iv.width
    if name == "uniform":
        dens = lambda x: 1.0 / w
    elif name.startswith("power"):
        g = m.gamma
        dens = lambda x: g * ((x - lo) / w) ** (g - 1.0) / w
    else:
        xs, cs = zip(*m.knots)
        slopes = np.diff(cs) / np.diff(xs)
        dens = lambda x: slopes[min(np.searchsorted(xs, x, side="right") - 1, len(slopes) - 1)]
    oracle, _ = integrate.quad(lambda x: x * x / 2.0 * dens(x), lo, iv.high, points=[0.3, 0.7], limit=200)
    assert expected_revenue(F, m) == pytest.approx(oracle, abs=1e-8)


def test_step_and_piecewise_agree(iv):
    menu = [Bundle(0, 0), Bundle(0.1, 0.3), Bundle(0.4, 0.8), Bundle(0.55, 1.0)]
    G = step_from_menu(menu, iv)
    P = piecewise([(iv.low, menu[0])] + [(th, z) for th, z in zip(G.thresholds, menu[1:])], iv)
    # redundant pieces repeating the same bundle change nothing
    P2 = piecewise(
        [(iv.low, menu[0]), (0.2, menu[0])] + [(th, z) for th, z in zip(G.thresholds, menu[1:])] + [(0.95, menu[-1])],
        iv,
    )
    for m in (ParamMeasure.uniform(iv), ParamMeasure.power(iv, 2.0)):
        exact = expected_revenue(G, m)
        oracle = sum(z.transfer * m.mass(a, b) for z, a, b in zip(menu, (iv.low, *G.thresholds), (*G.thresholds, iv.high)))
        assert exact == pytest.approx(oracle, abs=1e-15)
        assert expected_revenue(P, m) == pytest.approx(exact, abs=1e-9)
        assert expected_revenue(P2, m) == pytest.approx(exact, abs=1e-9)


def test_quadratic_money_posted_price_cut():
    fam = PreferenceFamily.quadratic_money(1.0)
    iv = PreferenceInterval(fam, 0.0, 2.0)
    m = ParamMeasure.uniform(iv)
    # the buyer of type theta accepts iff theta >= p + p^2
    p = 0.5
    assert expected_revenue(posted_price(p, iv), m) == pytest.approx(p * (2.0 - 0.75) / 2.0, abs=1e-12)


def test_truncations_increase_to_full_revenue(iv):
    m = ParamMeasure.uniform(iv)
    F = quadratic_sp(iv)
    full = expected_revenue(F, m)
    prev = -1.0
    for cap in (0.05, 0.1, 0.2, 0.3, 0.4, 0.5):
        lo, w = iv.low, iv.width
        trunc, _ = integrate.quad(lambda x: min(x * x / 2.0, cap) / w, lo, iv.high, points=[np.sqrt(2 * cap)])
        assert prev <= trunc <= full + 1e-12
        prev = trunc
    assert prev == pytest.approx(full, abs=1e-9)
