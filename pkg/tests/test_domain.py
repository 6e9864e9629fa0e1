import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finrange.domain import (
    QUASILINEAR,
    Bundle,
    Ordering,
    Preference,
    PreferenceFamily,
    PreferenceInterval,
    compare,
    cuts_from_above,
    ic_height,
    indiff_transfer,
    solve_indifferent_preference,
)
from finrange.errors import (
    DegenerateCornerError,
    NoSolutionError,
    NotDiagonalError,
    OutOfIntervalError,
    RichnessError,
)

FAMILIES = [
    PreferenceFamily.quasilinear(),
    PreferenceFamily.quadratic_money(0.5),
    PreferenceFamily.quadratic_money(1.0),
    PreferenceFamily.quadratic_money(2.0),
]


def quad_root(alpha, c):
    """Nonnegative root of t + alpha t^2 = c."""
    if alpha == 0:
        return c
    return (-1.0 + math.sqrt(1.0 + 4.0 * alpha * c)) / (2.0 * alpha)


def test_bundle_invariants():
    with pytest.raises(ValueError):
        Bundle(-0.1, 0.5)
    with pytest.raises(ValueError):
        Bundle(0.1, 1.5)
    assert Bundle(0.1, 0.2) < Bundle(0.2, 0.3)
    assert not Bundle(0.1, 0.2) < Bundle(0.1, 0.3)
    assert Bundle(0.1, 0.2) <= Bundle(0.1, 0.2)
    assert not Bundle(0.1, 0.2) <= Bundle(0.2, 0.2)


def test_interval_validation():
    with pytest.raises(ValueError):
        PreferenceInterval(QUASILINEAR, 1.0, 1.0)
    with pytest.raises(ValueError):
        PreferenceInterval(QUASILINEAR, -0.1, 1.0)


def test_compare_examples():
    R = Preference(QUASILINEAR, 0.5)
    assert compare(R, Bundle(0.2, 0.8), Bundle(0.1, 0.5)) is Ordering.FIRST_PREFERRED
    assert compare(R, Bundle(0.1, 0.5), Bundle(0.2, 0.8)) is Ordering.SECOND_PREFERRED
    z = Bundle(0.3, 0.4)
    assert compare(R, z, z) is Ordering.INDIFFERENT
    for fam in FAMILIES:
        assert compare(Preference(fam, 0.7), Bundle(0.1, 0.5), Bundle(0.2, 0.5)) is Ordering.FIRST_PREFERRED


def test_indiff_transfer_examples():
    R = Preference(QUASILINEAR, 0.5)
    assert indiff_transfer(R, Bundle(0.1, 0.5), 0.9) == pytest.approx(0.3, abs=1e-15)
    z = Bundle(0.123, 0.456)
    for fam in FAMILIES:
        assert indiff_transfer(Preference(fam, 0.8), z, z.prob) == z.transfer


def test_indiff_transfer_quadratic_money_matches_closed_form():
    R = Preference(PreferenceFamily.quadratic_money(1.0), 0.5)
    t = indiff_transfer(R, Bundle(0.0, 0.0), 0.5)
    assert t == pytest.approx(quad_root(1.0, 0.25), abs=1e-12)
    assert t == pytest.approx((math.sqrt(2.0) - 1.0) / 2.0, abs=1e-12)
    assert compare(R, Bundle(t, 0.5), Bundle(0.0, 0.0), tol=1e-10) is Ordering.INDIFFERENT


def test_indiff_transfer_no_solution():
    R = Preference(QUASILINEAR, 1.0)
    with pytest.raises(NoSolutionError):
        indiff_transfer(R, Bundle(0.1, 0.5), 0.1)
    with pytest.raises(NoSolutionError):
        indiff_transfer(Preference(PreferenceFamily.quadratic_money(2.0), 1.0), Bundle(0.1, 0.5), 0.1)


@pytest.mark.parametrize("fam", FAMILIES)
def test_indiff_transfer_lands_on_curve(fam):
    rng = np.random.default_rng(3)
    for _ in range(200):
        theta = rng.uniform(0.05, 3.0)
        z = Bundle(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0))
        q = rng.uniform(z.prob, 1.0)
        R = Preference(fam, theta)
        t = indiff_transfer(R, z, q)
        assert compare(R, Bundle(t, q), z, tol=1e-10) is Ordering.INDIFFERENT
        c = fam.money_cost(z.transfer) + theta * (q - z.prob)
        assert t == pytest.approx(quad_root(fam.shape, c), abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(
    fam=st.sampled_from(FAMILIES),
    theta=st.floats(0.05, 3.0),
    t=st.floats(0.0, 1.0),
    q=st.floats(0.0, 1.0),
    q2=st.floats(0.0, 1.0),
)
def test_indiff_transfer_round_trip(fam, theta, t, q, q2):
    R = Preference(fam, theta)
    z = Bundle(t, q)
    try:
        t2 = indiff_transfer(R, z, q2)
    except NoSolutionError:
        return
    back = indiff_transfer(R, Bundle(t2, q2), q)
    assert back == pytest.approx(t, abs=1e-8)


def test_solve_indifferent_preference_examples(iv):
    wide = PreferenceInterval(QUASILINEAR, 0.01, 10.0)
    R = solve_indifferent_preference(QUASILINEAR, Bundle(0.0, 0.0), Bundle(0.25, 0.5), wide)
    assert R.param == pytest.approx(0.5, abs=1e-15)
    R = solve_indifferent_preference(QUASILINEAR, Bundle(0.1, 0.2), Bundle(0.5, 0.6), wide)
    assert R.param == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NotDiagonalError):
        solve_indifferent_preference(QUASILINEAR, Bundle(0.5, 0.2), Bundle(0.1, 0.6), wide)
    with pytest.raises(RichnessError):
        solve_indifferent_preference(QUASILINEAR, Bundle(0.0, 0.0), Bundle(0.9, 0.5), iv)
    assert issubclass(RichnessError, OutOfIntervalError)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_solve_indifferent_quadratic_money(alpha):
    fam = PreferenceFamily.quadratic_money(alpha)
    iv = PreferenceInterval(fam, 0.01, 10.0)
    x1, x2 = Bundle(0.1, 0.2), Bundle(0.5, 0.6)
    R = solve_indifferent_preference(fam, x1, x2, iv)
    oracle = (fam.money_cost(0.5) - fam.money_cost(0.1)) / 0.4
    assert R.param == pytest.approx(oracle, abs=1e-10)
    assert compare(R, x1, x2, tol=1e-10) is Ordering.INDIFFERENT
    with pytest.raises(RichnessError):
        solve_indifferent_preference(fam, x1, x2, PreferenceInterval(fam, 0.01, 0.5))


def test_cuts_from_above_examples():
    z = Bundle(0.5, 0.8)
    lo, hi = Preference(QUASILINEAR, 0.5), Preference(QUASILINEAR, 1.0)
    assert cuts_from_above(lo, hi, z, 100)
    assert not cuts_from_above(hi, lo, z, 100)
    assert cuts_from_above(lo, lo, z, 100)
    assert not cuts_from_above(lo, lo, z, 100, strict=True)
    assert cuts_from_above(lo, hi, z, 100, strict=True)
    with pytest.raises(DegenerateCornerError):
        cuts_from_above(lo, hi, Bundle(0.0, 0.5))
    with pytest.raises(DegenerateCornerError):
        cuts_from_above(lo, hi, Bundle(0.5, 0.0))


@pytest.mark.parametrize("fam", FAMILIES)
def test_money_and_q_monotone(fam):
    rng = np.random.default_rng(11)
    for _ in range(1000):
        R = Preference(fam, rng.uniform(0.01, 5.0))
        q = rng.uniform(0.0, 1.0)
        t1, t2 = np.sort(rng.uniform(0.0, 2.0, 2))
        if t1 < t2:
            assert compare(R, Bundle(t1, q), Bundle(t2, q), tol=0.0) is Ordering.FIRST_PREFERRED
        t = rng.uniform(0.0, 2.0)
        q1, q2 = np.sort(rng.uniform(0.0, 1.0, 2))
        if q1 < q2:
            assert compare(R, Bundle(t, q2), Bundle(t, q1), tol=0.0) is Ordering.FIRST_PREFERRED


def sign_changes(d):
    s = np.sign(d[np.abs(d) > 1e-13])
    return int(np.count_nonzero(s[1:] != s[:-1]))


@pytest.mark.parametrize("fam", FAMILIES)
def test_single_crossing_sign_changes(fam):
    rng = np.random.default_rng(5)
    ts = np.linspace(0.0, 2.0, 1000)
    for _ in range(200):
        th1, th2 = rng.uniform(0.05, 3.0, 2)
        x = Bundle(rng.uniform(0, 1), rng.uniform(0, 1))
        y = Bundle(rng.uniform(0, 1), rng.uniform(0, 1))
        R1, R2 = Preference(fam, th1), Preference(fam, th2)
        h1, h2 = ic_height(R1, x, ts), ic_height(R2, y, ts)
        assert sign_changes(h1 - h2) <= 1
        # the heights really trace indifference curves
        k = rng.integers(0, len(ts))
        if 0.0 <= h1[k] <= 1.0:
            assert compare(R1, Bundle(ts[k], h1[k]), x, tol=1e-12) is Ordering.INDIFFERENT


@pytest.mark.parametrize("fam", FAMILIES)
def test_order_equivalence(fam):
    rng = np.random.default_rng(8)
    for _ in range(50):
        th1, th2 = np.sort(rng.uniform(0.05, 3.0, 2))
        R1, R2 = Preference(fam, th1), Preference(fam, th2)
        verdicts = set()
        for _ in range(10):
            z = Bundle(rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0))
            verdicts.add((cuts_from_above(R1, R2, z), cuts_from_above(R2, R1, z)))
        assert verdicts == {(True, False)}
