"""Finite-range approximation of a strategy-proof mechanism's revenue.

The payment rule ``t_F`` is bounded from below by the dyadic step function

    s_n(theta) = (k - 1) / 2**n   if (k - 1) / 2**n <= t_F(theta) < k / 2**n,
    s_n(theta) = n                if t_F(theta) >= n,

whose cells are intervals because ``t_F`` is monotone. At the left end of every
cell the mechanism's bundle is put on a menu; placing the thresholds at the
types indifferent between consecutive menu items gives a finite-range,
strategy-proof mechanism whose payment dominates ``s_n`` everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from finrange._roots import first_crossing
from finrange.domain import ZERO, Bundle, Preference, PreferenceInterval, solve_indifferent_preference
from finrange.errors import NotMonotoneError, OrderViolationError, OutOfIntervalError, VerificationError
from finrange.measure import ParamMeasure, expected_revenue
from finrange.mechanism import Mechanism, StepMechanism, verify_ir, verify_monotone, verify_sp

BOUNDARY_TOL = 0.0
BRACKET_TOL = 1e-8
DOMINATION_TOL = 1e-12
CHECK_GRID = 401


@dataclass(frozen=True)
class Cell:
    level: float
    lower: float
    upper: float
    lower_closed: bool = True
    upper_closed: bool = False

    def contains(self, x: float) -> bool:
        above = self.lower < x or (self.lower_closed and x == self.lower)
        below = x < self.upper or (self.upper_closed and x == self.upper)
        return above and below


@dataclass(frozen=True)
class SimpleFunction:
    """Step function on ``interval`` given by consecutive, non-overlapping cells."""

    n: int
    cells: tuple[Cell, ...]
    interval: PreferenceInterval

    def __post_init__(self) -> None:
        object.__setattr__(self, "_starts", np.array([c.lower for c in self.cells]))
        object.__setattr__(self, "_open", np.array([not c.lower_closed for c in self.cells]))
        object.__setattr__(self, "_levels", np.array([c.level for c in self.cells]))

    @property
    def boundaries(self) -> tuple[float, ...]:
        """Left ends of all cells but the first."""
        return tuple(c.lower for c in self.cells[1:])

    def values(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        idx = np.searchsorted(self._starts, theta, side="right") - 1
        idx = np.clip(idx, 0, len(self.cells) - 1)
        on_open_edge = (theta == self._starts[idx]) & self._open[idx]
        idx = np.where(on_open_edge, idx - 1, idx)
        return self._levels[np.clip(idx, 0, len(self.cells) - 1)]

    def expectation(self, measure: ParamMeasure) -> float:
        """Exact integral of the step function against ``measure``."""
        return float(sum(c.level * measure.mass(c.lower, c.upper) for c in self.cells if c.level > 0))


def dyadic_level(t: float, n: int) -> float:
    """Pointwise value of the dyadic lower approximation of a payment ``t``."""
    if t >= n:
        return float(n)
    return math.floor(t * 2**n) / 2**n


def eval_simple(s: SimpleFunction, R: Preference) -> float:
    if not s.interval.contains(R.param):
        raise OutOfIntervalError(f"parameter {R.param} outside [{s.interval.low}, {s.interval.high}]")
    return float(s.values(np.array([R.param]))[0])


def simple_function(
    F: Mechanism,
    n: int,
    interval: PreferenceInterval | None = None,
    tol: float = BOUNDARY_TOL,
    check_monotone: bool = True,
) -> SimpleFunction:
    """Dyadic lower approximation of ``t_F`` at resolution ``2**-n``, capped at ``n``.

    Each cell boundary ``inf{theta : t_F(theta) >= k / 2**n}`` is located by
    bisection. A cell is closed at its left boundary when ``t_F`` already
    reaches the new level there and open otherwise. Levels never attained by
    ``t_F`` produce no cell.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    iv = interval or F.interval
    if check_monotone:
        report = verify_monotone(F, iv, CHECK_GRID)
        if not report.ok:
            raise NotMonotoneError(
                f"payment rule decreases at {report.violation_count} grid step(s), e.g. {report.witnesses[:1]}"
            )
    lo, hi = iv.low, iv.high
    scale = 2.0**n
    top = float(F.payment(np.array([hi]))[0])
    k_max = min(n * 2**n, int(math.floor(top * scale)))
    levels = np.arange(1, k_max + 1) / scale
    bounds = first_crossing(F.payment, levels, lo, hi, tol)
    closed = F.payment(bounds) >= levels

    starts = [lo, *bounds.tolist()]
    closedness = [True, *closed.tolist()]
    values = [0.0, *levels.tolist()]
    cells = []
    for k in range(k_max + 1):
        a, a_closed = starts[k], closedness[k]
        if k < k_max:
            e, e_closed = starts[k + 1], not closedness[k + 1]
        else:
            e, e_closed = hi, True
        if e < a or (e == a and not (a_closed and e_closed)):
            continue
        cells.append(Cell(values[k], a, e, a_closed, e_closed))
    return SimpleFunction(n, tuple(cells), iv)


def _require_sp_ir(F: Mechanism, interval: PreferenceInterval, grid_size: int = CHECK_GRID) -> None:
    sp = verify_sp(F, interval, grid_size, 1e-9)
    ir = verify_ir(F, interval, grid_size, 1e-9)
    if not (sp.ok and ir.ok):
        raise VerificationError(
            f"mechanism is not strategy-proof and individually rational on the grid "
            f"(SP violations {sp.violation_count}, IR violations {ir.violation_count})"
        )


def build_finite_mechanism(F: Mechanism, s: SimpleFunction, check: bool = True) -> StepMechanism:
    """Finite-range mechanism whose payment dominates ``s`` pointwise.

    The menu is ``(0,0)``, the bundle ``F`` assigns at each interior cell
    boundary, and ``F`` at the top type. Consecutive items that are not
    strictly diagonal are merged, keeping the later one. Thresholds are the
    types indifferent between consecutive items and must interleave with the
    boundaries, otherwise :class:`OrderViolationError` is raised.
    """
    iv = s.interval
    if check:
        _require_sp_ir(F, iv)
    lo, hi = iv.low, iv.high

    items: list[tuple[Bundle, float]] = [(ZERO, lo)]
    candidates = []
    for c in s.cells[1:]:
        x = c.lower if c.lower_closed else math.nextafter(c.lower, hi)
        candidates.append((F.bundle_at(x), c.lower))
    candidates.append((F.bundle_at(hi), hi))
    for z, b in candidates:
        while True:
            prev, _ = items[-1]
            if prev < z:
                items.append((z, b))
                break
            if prev == z or len(items) == 1:
                # duplicate, or nothing above the outside option to merge into
                break
            items.pop()

    thresholds = _solve_thresholds(items, iv)
    menu = [z for z, _ in items]
    # an item whose cell collapsed is never chosen; drop it and re-solve around it
    while True:
        clash = next((k for k in range(len(thresholds) - 1) if thresholds[k + 1] <= thresholds[k]), None)
        if clash is None:
            break
        del items[clash + 1]
        del menu[clash + 1]
        thresholds = _solve_thresholds(items, iv)

    G = StepMechanism(tuple(menu), tuple(thresholds), iv)
    grid = iv.grid(1000)
    if np.any(s.values(grid) > G.payment(grid) + DOMINATION_TOL):
        raise OrderViolationError("finite mechanism fails to dominate the simple function")
    return G


def _solve_thresholds(items: list[tuple[Bundle, float]], iv: PreferenceInterval) -> list[float]:
    out = []
    for (z0, b0), (z1, b1) in zip(items, items[1:]):
        theta = solve_indifferent_preference(iv.family, z0, z1, iv).param
        if not (b0 - BRACKET_TOL <= theta <= b1 + BRACKET_TOL):
            raise OrderViolationError(
                f"threshold {theta:.12g} between {z0.as_tuple()} and {z1.as_tuple()} "
                f"escapes its bracket [{b0:.12g}, {b1:.12g}]"
            )
        out.append(theta)
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    e_simple: float
    e_finite: float
    e_full: float
    gap: float
    menu_size: int


def convergence_run(
    F: Mechanism,
    measure: ParamMeasure,
    n_values: Iterable[int],
    check: bool = True,
) -> list[ConvergenceRow]:
    """Expected revenue of ``s_n``, of its finite mechanism, and of ``F`` for each ``n``."""
    iv = measure.interval
    if check:
        _require_sp_ir(F, iv)
    e_full = expected_revenue(F, measure)
    rows = []
    for n in n_values:
        s = simple_function(F, n, iv, check_monotone=check)
        G = build_finite_mechanism(F, s, check=False)
        e_finite = expected_revenue(G, measure)
        rows.append(ConvergenceRow(n, s.expectation(measure), e_finite, e_full, e_full - e_finite, len(G.menu)))
    return rows
