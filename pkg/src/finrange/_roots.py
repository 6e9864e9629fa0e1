"""Bisection helpers for strictly monotone scalar functions."""

from __future__ import annotations

from typing import Callable

import numpy as np

MAX_ITER = 200


def bisect_decreasing(
    func: Callable[[float], float], lo: float, hi: float, max_iter: int = MAX_ITER
) -> float:
    """Root of a strictly decreasing ``func`` on ``[lo, hi]``.

    Requires ``func(lo) >= 0 >= func(hi)``. Iterates until the bracket is two
    adjacent floats (or ``max_iter`` halvings) and returns the endpoint with the
    smaller residual.
    """
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo < 0.0 or f_hi > 0.0:
        raise ValueError("root is not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = func(mid)
        if f_mid == 0.0:
            return mid
        if f_mid > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return lo if abs(f_lo) <= abs(f_hi) else hi


def bisect_increasing(
    func: Callable[[float], float], lo: float, hi: float, max_iter: int = MAX_ITER
) -> float:
    return bisect_decreasing(lambda x: -func(x), lo, hi, max_iter)


def expand_upper(
    func: Callable[[float], float], start: float, max_doublings: int = 200
) -> float:
    """Smallest ``start * 2**k`` at which a decreasing ``func`` is non-positive."""
    hi = max(start, 1.0)
    for _ in range(max_doublings):
        if func(hi) <= 0.0:
            return hi
        hi *= 2.0
    raise ValueError("could not bracket root")


def first_crossing(
    func: Callable[[np.ndarray], np.ndarray],
    levels: np.ndarray,
    lo: float,
    hi: float,
    tol: float = 0.0,
    max_iter: int = MAX_ITER,
) -> np.ndarray:
    """Vectorised ``inf{x in [lo, hi] : func(x) >= level}`` for a nondecreasing ``func``.

    Every level must satisfy ``func(hi) >= level``. The returned points always
    satisfy ``func(x) >= level``: they are the upper end of the final bracket.
    """
    levels = np.asarray(levels, dtype=float)
    a = np.full(levels.shape, float(lo))
    b = np.full(levels.shape, float(hi))
    done = func(a) >= levels
    b[done] = a[done]
    for _ in range(max_iter):
        active = ~done & (b - a > tol)
        if not active.any():
            break
        mid = 0.5 * (a + b)
        stuck = (mid <= a) | (mid >= b)
        active &= ~stuck
        done |= stuck
        if not active.any():
            break
        up = func(mid) >= levels
        b = np.where(active & up, mid, b)
        a = np.where(active & ~up, mid, a)
    return b
