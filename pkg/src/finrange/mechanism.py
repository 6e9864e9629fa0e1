"""Direct mechanisms for one buyer and grid-based checks of their incentive properties.

A mechanism maps the buyer's preference parameter to a bundle. Two
representations exist: :class:`AnalyticMechanism` (a preset from a fixed
catalogue) and :class:`StepMechanism` (a finite menu with threshold types).
Both expose vectorised ``payment`` and ``allocation`` over parameter arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from finrange.domain import (
    ZERO,
    Bundle,
    Preference,
    PreferenceFamily,
    PreferenceInterval,
    solve_indifferent_preference,
)
from finrange.errors import OutOfIntervalError

MAX_WITNESSES = 32
MONOTONE_TOL = 1e-12
THRESHOLD_NUDGE = 1e-9


class Mechanism:
    """Common surface of both mechanism representations."""

    interval: PreferenceInterval

    @property
    def family(self) -> PreferenceFamily:
        return self.interval.family

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Parameters where the mechanism may jump."""
        return ()

    def payment(self, theta) -> np.ndarray:
        raise NotImplementedError

    def allocation(self, theta) -> np.ndarray:
        raise NotImplementedError

    def bundle_at(self, theta: float) -> Bundle:
        t = float(self.payment(np.array([theta]))[0])
        q = float(self.allocation(np.array([theta]))[0])
        return Bundle(t, q)


class Preset(enum.Enum):
    QUADRATIC_SP = "quadratic_sp"
    POSTED_PRICE = "posted_price"
    LINEAR_RAW = "linear_raw"
    PIECEWISE = "piecewise"


@dataclass(frozen=True)
class AnalyticMechanism(Mechanism):
    """A catalogue preset.

    ``params`` depends on the preset: ``()`` for QUADRATIC_SP, ``(price,)`` for
    POSTED_PRICE, ``(intercept, slope)`` for LINEAR_RAW, and a tuple of
    ``(breakpoint, Bundle)`` pairs for PIECEWISE, where each bundle is assigned
    from its breakpoint up to (not including) the next one.
    """

    preset: Preset
    interval: PreferenceInterval
    params: tuple = ()
    _cut: float = field(default=0.0, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        lo, hi = self.interval.low, self.interval.high
        if self.preset is Preset.QUADRATIC_SP:
            if hi > 1.0:
                raise ValueError("QUADRATIC_SP allocates q = theta, so the interval must lie in [0, 1]")
        elif self.preset is Preset.POSTED_PRICE:
            (price,) = self.params
            if price <= 0.0:
                raise ValueError("posted price must be positive")
            # buyers at or above the indifferent type purchase
            cut = float(self.family.money_cost(price))
            object.__setattr__(self, "_cut", cut)
        elif self.preset is Preset.LINEAR_RAW:
            a, b = self.params
            if hi > 1.0:
                raise ValueError("LINEAR_RAW allocates q = theta, so the interval must lie in [0, 1]")
            if min(a + b * lo, a + b * hi) < 0.0:
                raise ValueError("LINEAR_RAW payment turns negative on the interval")
        elif self.preset is Preset.PIECEWISE:
            pts = self.params
            if not pts:
                raise ValueError("PIECEWISE needs at least one (breakpoint, bundle) pair")
            cuts = [float(p) for p, _ in pts]
            if cuts[0] != lo:
                raise ValueError("the first PIECEWISE breakpoint must equal the interval low")
            if any(b <= a for a, b in zip(cuts, cuts[1:])) or cuts[-1] > hi:
                raise ValueError("PIECEWISE breakpoints must increase strictly inside the interval")
            for _, z in pts:
                if not isinstance(z, Bundle):
                    raise TypeError("PIECEWISE values must be Bundle instances")

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.preset is Preset.POSTED_PRICE:
            if self.interval.low < self._cut <= self.interval.high:
                return (self._cut,)
            return ()
        if self.preset is Preset.PIECEWISE:
            return tuple(float(p) for p, _ in self.params[1:])
        return ()

    def _piece_index(self, theta: np.ndarray) -> np.ndarray:
        cuts = np.array([float(p) for p, _ in self.params])
        return np.searchsorted(cuts, theta, side="right") - 1

    def payment(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.preset is Preset.QUADRATIC_SP:
            return 0.5 * theta * theta
        if self.preset is Preset.POSTED_PRICE:
            return np.where(theta >= self._cut, self.params[0], 0.0)
        if self.preset is Preset.LINEAR_RAW:
            a, b = self.params
            return a + b * theta
        ts = np.array([z.transfer for _, z in self.params])
        return ts[np.clip(self._piece_index(theta), 0, len(ts) - 1)]

    def allocation(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.preset in (Preset.QUADRATIC_SP, Preset.LINEAR_RAW):
            return theta.copy()
        if self.preset is Preset.POSTED_PRICE:
            return np.where(theta >= self._cut, 1.0, 0.0)
        qs = np.array([z.prob for _, z in self.params])
        return qs[np.clip(self._piece_index(theta), 0, len(qs) - 1)]


def quadratic_sp(interval: PreferenceInterval) -> AnalyticMechanism:
    """``q = theta``, ``t = theta**2 / 2``; strategy-proof for quasilinear buyers."""
    return AnalyticMechanism(Preset.QUADRATIC_SP, interval)


def posted_price(price: float, interval: PreferenceInterval) -> AnalyticMechanism:
    return AnalyticMechanism(Preset.POSTED_PRICE, interval, (float(price),))


def linear_raw(intercept: float, slope: float, interval: PreferenceInterval) -> AnalyticMechanism:
    """``q = theta``, ``t = intercept + slope * theta``; generally not strategy-proof."""
    return AnalyticMechanism(Preset.LINEAR_RAW, interval, (float(intercept), float(slope)))


def piecewise(points: Sequence[tuple[float, Bundle]], interval: PreferenceInterval) -> AnalyticMechanism:
    pts = tuple((float(p), z) for p, z in points)
    return AnalyticMechanism(Preset.PIECEWISE, interval, pts)


@dataclass(frozen=True)
class StepMechanism(Mechanism):
    """Finite menu ``(0,0) = menu[0] < menu[1] < ...`` with one threshold per transition.

    ``menu[i]`` is assigned on ``[thresholds[i-1], thresholds[i])``; the last
    item also gets the interval's upper endpoint.
    """

    menu: tuple[Bundle, ...]
    thresholds: tuple[float, ...]
    interval: PreferenceInterval

    def __post_init__(self) -> None:
        object.__setattr__(self, "menu", tuple(self.menu))
        object.__setattr__(self, "thresholds", tuple(float(x) for x in self.thresholds))
        if not self.menu or self.menu[0] != ZERO:
            raise ValueError("the first menu item must be (0, 0)")
        if len(self.thresholds) != len(self.menu) - 1:
            raise ValueError("a menu of size m+1 needs exactly m thresholds")
        for a, b in zip(self.menu, self.menu[1:]):
            if not a < b:
                raise ValueError(f"menu items {a.as_tuple()} and {b.as_tuple()} are not diagonal")
        th = self.thresholds
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if th and not (self.interval.low <= th[0] and th[-1] <= self.interval.high):
            raise ValueError("thresholds must lie inside the interval")
        object.__setattr__(self, "_t", np.array([z.transfer for z in self.menu]))
        object.__setattr__(self, "_q", np.array([z.prob for z in self.menu]))
        object.__setattr__(self, "_th", np.array(th, dtype=float))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.thresholds

    @property
    def threshold_preferences(self) -> tuple[Preference, ...]:
        return tuple(Preference(self.family, x) for x in self.thresholds)

    def index(self, theta) -> np.ndarray:
        return np.searchsorted(self._th, np.asarray(theta, dtype=float), side="right")

    def payment(self, theta) -> np.ndarray:
        return self._t[self.index(theta)]

    def allocation(self, theta) -> np.ndarray:
        return self._q[self.index(theta)]

    def cells(self) -> list[tuple[float, float]]:
        """Parameter range ``[lower, upper)`` of every menu item."""
        edges = [self.interval.low, *self.thresholds, self.interval.high]
        return list(zip(edges[:-1], edges[1:]))


def zero_mechanism(interval: PreferenceInterval) -> StepMechanism:
    """The mechanism that always assigns the outside option."""
    return StepMechanism((ZERO,), (), interval)


def step_from_menu(menu: Sequence[Bundle], interval: PreferenceInterval) -> StepMechanism:
    """Step mechanism whose thresholds are the indifference types between consecutive items."""
    menu = tuple(menu)
    th = [
        solve_indifferent_preference(interval.family, a, b, interval).param
        for a, b in zip(menu, menu[1:])
    ]
    return StepMechanism(menu, tuple(th), interval)


def evaluate(F: Mechanism, R: Preference) -> Bundle:
    """The bundle ``F`` assigns to preference ``R``."""
    if not F.interval.contains(R.param):
        raise OutOfIntervalError(
            f"parameter {R.param} outside [{F.interval.low}, {F.interval.high}]"
        )
    return F.bundle_at(R.param)


@dataclass(frozen=True)
class VerificationReport:
    violation_count: int
    worst_violation: float
    witnesses: tuple[tuple[float, ...], ...] = ()

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def describe(self, name: str) -> str:
        head = f"{name}: {self.violation_count} violation(s), worst gap {self.worst_violation:.6g}"
        lines = [head]
        for w in self.witnesses:
            lines.append("  witness " + ", ".join(f"{x:.12g}" for x in w))
        return "\n".join(lines)


def verification_grid(F: Mechanism, interval: PreferenceInterval | None, grid_size: int) -> np.ndarray:
    """Uniform grid plus every breakpoint of ``F`` and its nudges to either side."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    iv = interval or F.interval
    pts = [iv.grid(grid_size)]
    bp = np.array(F.breakpoints, dtype=float)
    if bp.size:
        pts.append(np.concatenate([bp, bp - THRESHOLD_NUDGE, bp + THRESHOLD_NUDGE]))
    grid = np.unique(np.concatenate(pts))
    return grid[(grid >= iv.low) & (grid <= iv.high)]


def verify_sp(
    F: Mechanism,
    interval: PreferenceInterval | None = None,
    grid_size: int = 401,
    tol: float = 1e-9,
) -> VerificationReport:
    """Count grid pairs ``(i, j)`` where type ``i`` gains more than ``tol`` by reporting ``j``.

    Witnesses are ``(true_param, reported_param)`` pairs.
    """
    theta = verification_grid(F, interval, grid_size)
    fam = F.family
    T, Q = F.payment(theta), F.allocation(theta)
    bundles, first, counts = np.unique(
        np.column_stack([T, Q]), axis=0, return_index=True, return_counts=True
    )
    u_own = fam.utility(theta, T, Q)
    count, worst, witnesses = 0, 0.0, []
    rows = max(1, 2_000_000 // max(1, len(bundles)))
    for start in range(0, len(theta), rows):
        sl = slice(start, start + rows)
        gain = fam.utility(theta[sl, None], bundles[None, :, 0], bundles[None, :, 1]) - u_own[sl, None]
        bad = gain > tol
        count += int((bad * counts[None, :]).sum())
        worst = max(worst, float(gain.max()))
        if len(witnesses) < MAX_WITNESSES and bad.any():
            for i, j in zip(*np.nonzero(bad)):
                witnesses.append((float(theta[start + i]), float(theta[first[j]])))
                if len(witnesses) == MAX_WITNESSES:
                    break
    return VerificationReport(count, worst, tuple(witnesses))


def verify_ir(
    F: Mechanism,
    interval: PreferenceInterval | None = None,
    grid_size: int = 401,
    tol: float = 1e-9,
) -> VerificationReport:
    """Grid types that strictly prefer the outside option ``(0, 0)`` beyond ``tol``."""
    theta = verification_grid(F, interval, grid_size)
    fam = F.family
    loss = fam.utility(theta, 0.0, 0.0) - fam.utility(theta, F.payment(theta), F.allocation(theta))
    bad = np.nonzero(loss > tol)[0]
    witnesses = tuple((float(theta[i]),) for i in bad[:MAX_WITNESSES])
    return VerificationReport(int(bad.size), max(0.0, float(loss.max())), witnesses)


def verify_monotone(
    F: Mechanism,
    interval: PreferenceInterval | None = None,
    grid_size: int = 401,
) -> VerificationReport:
    """Adjacent grid pairs where the transfer or the probability decreases."""
    theta = verification_grid(F, interval, grid_size)
    T, Q = F.payment(theta), F.allocation(theta)
    drop = np.maximum(T[:-1] - T[1:], Q[:-1] - Q[1:])
    bad = np.nonzero(drop > MONOTONE_TOL)[0]
    witnesses = tuple((float(theta[i]), float(theta[i + 1])) for i in bad[:MAX_WITNESSES])
    worst = max(0.0, float(drop.max())) if drop.size else 0.0
    return VerificationReport(int(bad.size), worst, witnesses)


__all__ = [
    "AnalyticMechanism",
    "Mechanism",
    "Preset",
    "StepMechanism",
    "VerificationReport",
    "evaluate",
    "linear_raw",
    "piecewise",
    "posted_price",
    "quadratic_sp",
    "step_from_menu",
    "verify_ir",
    "verify_monotone",
    "verify_sp",
    "zero_mechanism",
]
