"""Single-crossing preference families over (transfer, probability) bundles.

Two concrete families are provided:

* ``QUASILINEAR``: a type ``theta`` ranks ``(t, q)`` by ``theta * q - t``.
* ``QUADRATIC_MONEY``: ranks by ``theta * q - t - alpha * t**2`` (not quasilinear
  for ``alpha > 0``).

The utility index is only a computable stand-in for the ordinal relation; all
public comparisons go through :func:`compare` with an explicit tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from finrange._roots import bisect_decreasing, bisect_increasing, expand_upper
from finrange.errors import (
    DegenerateCornerError,
    NoSolutionError,
    NotDiagonalError,
    RichnessError,
)

COMPARE_TOL = 1e-12
SOLVER_TOL = 1e-10


@dataclass(frozen=True)
class Bundle:
    """A payment ``transfer`` and an allocation probability ``prob``."""

    transfer: float
    prob: float

    def __post_init__(self) -> None:
        if not (self.transfer >= 0.0 and math.isfinite(self.transfer)):
            raise ValueError(f"transfer must be finite and >= 0, got {self.transfer}")
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"prob must lie in [0, 1], got {self.prob}")

    def __lt__(self, other: Bundle) -> bool:
        # diagonal order: strictly smaller in both coordinates
        return self.transfer < other.transfer and self.prob < other.prob

    def __le__(self, other: Bundle) -> bool:
        return self == other or self < other

    def __gt__(self, other: Bundle) -> bool:
        return other < self

    def __ge__(self, other: Bundle) -> bool:
        return other <= self

    def as_tuple(self) -> tuple[float, float]:
        return (self.transfer, self.prob)


ZERO = Bundle(0.0, 0.0)


class FamilyId(enum.Enum):
    QUASILINEAR = "quasilinear"
    QUADRATIC_MONEY = "quadratic_money"


@dataclass(frozen=True)
class PreferenceFamily:
    family_id: FamilyId = FamilyId.QUASILINEAR
    shape: float = 0.0

    def __post_init__(self) -> None:
        if self.shape < 0.0 or not math.isfinite(self.shape):
            raise ValueError(f"shape must be finite and >= 0, got {self.shape}")
        if self.family_id is FamilyId.QUASILINEAR and self.shape != 0.0:
            raise ValueError("QUASILINEAR takes no shape coefficient")

    @classmethod
    def quasilinear(cls) -> PreferenceFamily:
        return cls(FamilyId.QUASILINEAR, 0.0)

    @classmethod
    def quadratic_money(cls, alpha: float) -> PreferenceFamily:
        return cls(FamilyId.QUADRATIC_MONEY, float(alpha))

    @property
    def is_quasilinear(self) -> bool:
        return self.family_id is FamilyId.QUASILINEAR or self.shape == 0.0

    def money_cost(self, t):
        """Disutility of paying ``t``; strictly increasing on ``t >= 0``."""
        if self.family_id is FamilyId.QUASILINEAR:
            return t
        return t + self.shape * t * t

    def utility(self, theta, t, q):
        """Utility index; broadcasts over numpy arrays."""
        return theta * q - self.money_cost(t)

    def __call__(self, param: float) -> Preference:
        return Preference(self, param)


QUASILINEAR = PreferenceFamily.quasilinear()


@dataclass(frozen=True)
class Preference:
    family: PreferenceFamily
    param: float

    def __post_init__(self) -> None:
        if not (self.param >= 0.0 and math.isfinite(self.param)):
            raise ValueError(f"preference parameter must be finite and >= 0, got {self.param}")

    def utility(self, z: Bundle) -> float:
        return float(self.family.utility(self.param, z.transfer, z.prob))


@dataclass(frozen=True)
class PreferenceInterval:
    """Closed parameter interval ``[low, high]`` of one family."""

    family: PreferenceFamily
    low: float
    high: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.low < self.high and math.isfinite(self.high)):
            raise ValueError(f"need 0 <= low < high, got [{self.low}, {self.high}]")

    @property
    def width(self) -> float:
        return self.high - self.low

    def contains(self, param: float, slack: float = 0.0) -> bool:
        return self.low - slack <= param <= self.high + slack

    def grid(self, size: int) -> np.ndarray:
        return np.linspace(self.low, self.high, size)

    def preference(self, param: float) -> Preference:
        return Preference(self.family, param)


class Ordering(enum.Enum):
    FIRST_PREFERRED = 1
    SECOND_PREFERRED = -1
    INDIFFERENT = 0


def compare(R: Preference, z1: Bundle, z2: Bundle, tol: float = COMPARE_TOL) -> Ordering:
    """Classify ``z1`` versus ``z2`` under ``R``; gaps within ``tol`` are indifference."""
    gap = R.utility(z1) - R.utility(z2)
    if gap > tol:
        return Ordering.FIRST_PREFERRED
    if gap < -tol:
        return Ordering.SECOND_PREFERRED
    return Ordering.INDIFFERENT


def indiff_transfer(R: Preference, z: Bundle, q_target: float) -> float:
    """Transfer ``t`` such that ``(t, q_target)`` is indifferent to ``z`` under ``R``.

    Raises :class:`NoSolutionError` when the indifference curve would need a
    negative transfer at ``q_target``.
    """
    if not 0.0 <= q_target <= 1.0:
        raise ValueError(f"q_target must lie in [0, 1], got {q_target}")
    if q_target == z.prob:
        return z.transfer
    fam, theta = R.family, R.param
    if fam.family_id is FamilyId.QUASILINEAR:
        t = z.transfer + theta * (q_target - z.prob)
        if t < 0.0:
            if t >= -COMPARE_TOL:
                return 0.0
            raise NoSolutionError(
                f"indifference curve through {z.as_tuple()} needs transfer {t:.6g} at q={q_target}"
            )
        return t
    u_z = R.utility(z)

    def gap(t: float) -> float:
        return fam.utility(theta, t, q_target) - u_z

    g0 = gap(0.0)
    if g0 < 0.0:
        if g0 >= -COMPARE_TOL:
            return 0.0
        raise NoSolutionError(
            f"indifference curve through {z.as_tuple()} exits the money range before q={q_target}"
        )
    hi = expand_upper(gap, max(z.transfer, 1.0))
    return bisect_decreasing(gap, 0.0, hi)


def ic_height(R: Preference, z: Bundle, t):
    """Probability on the indifference curve through ``z`` at transfer ``t``.

    Unclipped: values outside ``[0, 1]`` mean the curve has left the bundle space.
    Requires ``R.param > 0``.
    """
    if R.param <= 0.0:
        raise ValueError("indifference curves are vertical at param 0")
    fam = R.family
    t = np.asarray(t, dtype=float)
    return z.prob + (fam.money_cost(t) - fam.money_cost(z.transfer)) / R.param


def solve_indifferent_preference(
    family: PreferenceFamily, x1: Bundle, x2: Bundle, interval: PreferenceInterval
) -> Preference:
    """The preference in ``interval`` that is indifferent between ``x1 < x2``.

    Raises :class:`NotDiagonalError` unless ``x1 < x2`` and :class:`RichnessError`
    when the indifferent parameter lies outside ``interval``.
    """
    if not x1 < x2:
        raise NotDiagonalError(f"{x1.as_tuple()} is not diagonally below {x2.as_tuple()}")
    lo, hi = interval.low, interval.high
    slack = COMPARE_TOL * max(1.0, hi)
    dq = x2.prob - x1.prob
    if family.family_id is FamilyId.QUASILINEAR:
        theta = (x2.transfer - x1.transfer) / dq
        if not interval.contains(theta, slack):
            raise RichnessError(
                f"indifferent parameter {theta:.12g} lies outside [{lo}, {hi}]"
            )
        return Preference(family, min(max(theta, lo), hi))

    def gain(theta: float) -> float:
        # utility of x2 over x1; strictly increasing in theta
        return float(family.utility(theta, x2.transfer, x2.prob) - family.utility(theta, x1.transfer, x1.prob))

    g_lo, g_hi = gain(lo), gain(hi)
    if g_lo > COMPARE_TOL or g_hi < -COMPARE_TOL:
        side = "below" if g_lo > 0 else "above"
        raise RichnessError(
            f"indifferent parameter for {x1.as_tuple()} ~ {x2.as_tuple()} lies {side} [{lo}, {hi}]"
        )
    if g_lo >= 0.0:
        return Preference(family, lo)
    if g_hi <= 0.0:
        return Preference(family, hi)
    return Preference(family, bisect_increasing(gain, lo, hi))


def cuts_from_above(
    R1: Preference,
    R2: Preference,
    z: Bundle,
    probe_count: int = 100,
    strict: bool = False,
    tol: float = COMPARE_TOL,
) -> bool:
    """Whether ``R2`` cuts ``R1`` from above at ``z``.

    Compares the heights of both indifference curves through ``z`` inside the
    lower box of ``z`` at ``probe_count`` equally spaced transfers below
    ``z.transfer``. The weak version (default) holds for identical preferences;
    ``strict=True`` additionally requires a visible separation.
    """
    if R1.family != R2.family:
        raise ValueError("preferences belong to different families")
    if z.transfer <= 0.0 or z.prob <= 0.0:
        raise DegenerateCornerError(f"bundle {z.as_tuple()} touches an axis")
    if probe_count < 1:
        raise ValueError("probe_count must be positive")
    ts = z.transfer * np.arange(probe_count) / probe_count
    h1 = np.clip(ic_height(R1, z, ts), 0.0, z.prob)
    h2 = np.clip(ic_height(R2, z, ts), 0.0, z.prob)
    if np.any(h2 < h1 - tol):
        return False
    if strict:
        return bool(np.any(h2 > h1 + tol))
    return True
