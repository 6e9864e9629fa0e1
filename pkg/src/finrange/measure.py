"""Continuous type distributions on a preference interval and expected revenue.

Every measure is a continuous, strictly increasing CDF on ``[low, high]``, so
it has no atoms and gives positive mass to every nondegenerate subinterval.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from finrange.domain import PreferenceInterval
from finrange.errors import OutOfIntervalError
from finrange.mechanism import Mechanism, StepMechanism

QUAD_TOL = 1e-9
MAX_DEPTH = 60
_EDGE_SLACK = 1e-12


class MeasureKind(enum.Enum):
    UNIFORM = "uniform"
    POWER = "power"
    PIECEWISE_LINEAR_CDF = "piecewise_linear"


@dataclass(frozen=True)
class ParamMeasure:
    kind: MeasureKind
    interval: PreferenceInterval
    gamma: float = 1.0
    knots: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        lo, hi = self.interval.low, self.interval.high
        if self.kind is MeasureKind.POWER and not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"power exponent must be positive, got {self.gamma}")
        if self.kind is MeasureKind.PIECEWISE_LINEAR_CDF:
            knots = [(float(x), float(c)) for x, c in self.knots]
            if not knots or knots[0] != (lo, 0.0):
                knots.insert(0, (lo, 0.0))
            if knots[-1] != (hi, 1.0):
                knots.append((hi, 1.0))
            for (x0, c0), (x1, c1) in zip(knots, knots[1:]):
                if not (x1 > x0 and c1 > c0):
                    raise ValueError("CDF knots must increase strictly in both coordinates")
            if knots[0][0] < lo or knots[-1][0] > hi:
                raise ValueError("CDF knots must lie inside the interval")
            object.__setattr__(self, "knots", tuple(knots))

    @classmethod
    def uniform(cls, interval: PreferenceInterval) -> ParamMeasure:
        return cls(MeasureKind.UNIFORM, interval)

    @classmethod
    def power(cls, interval: PreferenceInterval, gamma: float) -> ParamMeasure:
        """CDF ``((x - low) / (high - low)) ** gamma``."""
        return cls(MeasureKind.POWER, interval, gamma=float(gamma))

    @classmethod
    def piecewise_linear(cls, interval: PreferenceInterval, knots: Sequence[tuple[float, float]]) -> ParamMeasure:
        return cls(MeasureKind.PIECEWISE_LINEAR_CDF, interval, knots=tuple(knots))

    @property
    def split_points(self) -> tuple[float, ...]:
        """Parameters where the density is not smooth."""
        if self.kind is MeasureKind.PIECEWISE_LINEAR_CDF:
            return tuple(x for x, _ in self.knots[1:-1])
        return ()

    def cdf(self, x):
        lo, w = self.interval.low, self.interval.width
        x = np.clip(np.asarray(x, dtype=float), lo, self.interval.high)
        if self.kind is MeasureKind.UNIFORM:
            return (x - lo) / w
        if self.kind is MeasureKind.POWER:
            return ((x - lo) / w) ** self.gamma
        xs, cs = zip(*self.knots)
        return np.interp(x, xs, cs)

    def quantile(self, u):
        lo, w = self.interval.low, self.interval.width
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        if self.kind is MeasureKind.UNIFORM:
            return lo + w * u
        if self.kind is MeasureKind.POWER:
            return lo + w * u ** (1.0 / self.gamma)
        xs, cs = zip(*self.knots)
        return np.interp(u, cs, xs)

    def mass(self, lower: float, upper: float) -> float:
        """Probability of ``[lower, upper]``; endpoint closedness is irrelevant."""
        lo, hi = self.interval.low, self.interval.high
        slack = _EDGE_SLACK * max(1.0, hi)
        if not (lo - slack <= lower <= upper + slack and upper <= hi + slack):
            raise OutOfIntervalError(f"[{lower}, {upper}] is not a subinterval of [{lo}, {hi}]")
        if upper <= lower:
            return 0.0
        return float(self.cdf(upper) - self.cdf(lower))


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""

    def simpson(fa: float, fm: float, fb: float, width: float) -> float:
        return width * (fa + 4.0 * fm + fb) / 6.0

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + recurse(
            m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
        )

    if b <= a:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, MAX_DEPTH)


def _pieces(F: Mechanism, m: ParamMeasure) -> list[tuple[float, float]]:
    lo, hi = m.interval.low, m.interval.high
    cuts = {lo, hi}
    cuts.update(x for x in F.breakpoints if lo < x < hi)
    cuts.update(m.split_points)
    edges = sorted(cuts)
    return list(zip(edges[:-1], edges[1:]))


def expected_revenue(F: Mechanism, m: ParamMeasure, quad_tol: float = QUAD_TOL) -> float:
    """Expected payment of ``F`` when the buyer's type is drawn from ``m``.

    Step mechanisms are summed exactly over their cells. Otherwise the payment
    is integrated in probability space, ``int_0^1 t(Q(u)) du`` with ``Q`` the
    quantile function, piece by piece between the mechanism's breakpoints and
    the CDF's knots.
    """
    if not (F.interval.low <= m.interval.low and m.interval.high <= F.interval.high):
        raise OutOfIntervalError("the measure's interval is not covered by the mechanism")
    if isinstance(F, StepMechanism):
        total = 0.0
        for z, (a, b) in zip(F.menu, F.cells()):
            a, b = max(a, m.interval.low), min(b, m.interval.high)
            if b > a and z.transfer > 0.0:
                total += z.transfer * m.mass(a, b)
        return total

    total = 0.0
    for a, b in _pieces(F, m):
        # evaluate just inside the piece so a jump at an edge stays on its own side
        a_in = math.nextafter(a, b)
        b_in = math.nextafter(b, a)
        ua, ub = float(m.cdf(a)), float(m.cdf(b))

        def integrand(u: float) -> float:
            x = min(max(float(m.quantile(u)), a_in), b_in)
            return float(F.payment(np.array([x]))[0])

        total += adaptive_simpson(integrand, ua, ub, quad_tol * (ub - ua))
    return total
