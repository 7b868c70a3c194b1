"""Small numerical kernels: adaptive Simpson, vectorized bisection, Richardson."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class InversionError(RuntimeError):
    """Bisection failed to bracket or converge."""


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_depth: int = 30,
) -> float:
    """Integrate ``f`` over ``[a, b]`` with recursive adaptive Simpson.

    Uses the classical ``|S2 - S1| <= 15 tol`` acceptance test with Richardson
    correction.  Subintervals still failing the test at ``max_depth`` are
    accepted, and their error estimates are summed; :class:`QuadratureError`
    is raised when that unresolved error exceeds ``tol``.
    """
    if b == a:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    # explicit stack; recursion on deep refinements is slow in CPython
    total = 0.0
    unresolved = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a_, b_, fa_, fm_, fb_, s, eps, depth = stack.pop()
        m_ = 0.5 * (a_ + b_)
        lm, rm = 0.5 * (a_ + m_), 0.5 * (m_ + b_)
        flm, frm = f(lm), f(rm)
        left = (m_ - a_) / 6.0 * (fa_ + 4.0 * flm + fm_)
        right = (b_ - m_) / 6.0 * (fm_ + 4.0 * frm + fb_)
        delta = left + right - s
        if abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        elif depth >= max_depth:
            total += left + right + delta / 15.0
            unresolved += abs(delta) / 15.0
        else:
            stack.append((a_, m_, fa_, flm, fm_, left, 0.5 * eps, depth + 1))
            stack.append((m_, b_, fm_, frm, fb_, right, 0.5 * eps, depth + 1))
    if unresolved > tol:
        raise QuadratureError(
            f"adaptive Simpson left an error estimate of {unresolved:.3g} "
            f"unresolved at depth {max_depth} (tolerance {tol:.3g})"
        )
    return total


def bisect_increasing(
    f: Callable[[np.ndarray], np.ndarray],
    target,
    lo,
    hi,
    ftol: float = 1e-13,
    max_iter: int = 200,
    indexed: bool = False,
) -> np.ndarray:
    """Solve ``f(x) = target`` elementwise for nondecreasing ``f`` by bisection.

    ``f`` must accept and return 1-d arrays; with ``indexed=True`` it is called
    as ``f(x, idx)`` where ``idx`` holds the flat positions of the still-active
    elements.  An element stops once
    ``|f(x) - target| < ftol`` or its bracket collapses to adjacent floats.
    """
    target = np.asarray(target, dtype=float)
    shape = target.shape
    t = target.ravel()
    lo = np.broadcast_to(np.asarray(lo, dtype=float), shape).ravel().copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), shape).ravel().copy()
    x = 0.5 * (lo + hi)
    idx = np.arange(t.size)
    for _ in range(max_iter):
        if idx.size == 0:
            return x.reshape(shape)
        xm = 0.5 * (lo[idx] + hi[idx])
        err = np.asarray(f(xm, idx) if indexed else f(xm), dtype=float) - t[idx]
        x[idx] = xm
        below = err < 0
        lo[idx] = np.where(below, xm, lo[idx])
        hi[idx] = np.where(below, hi[idx], xm)
        done = (np.abs(err) < ftol) | (hi[idx] - lo[idx] <= 4e-16 * np.maximum(1.0, np.abs(xm)))
        idx = idx[~done]
    if idx.size:
        raise InversionError(
            f"bisection did not converge for {idx.size} element(s) "
            f"after {max_iter} iterations"
        )
    return x.reshape(shape)


def richardson(values: np.ndarray, ratio: float, order: int = 1) -> np.ndarray:
    """First-level Richardson extrapolation of a sequence ``q(h_k)``.

    ``values[k]`` is evaluated at ``h_k = h_0 / ratio**k``; the leading error term
    is assumed ``O(h**order)``.  Returns ``len(values) - 1`` extrapolated values.
    """
    values = np.asarray(values, dtype=float)
    w = ratio**order
    return (w * values[1:] - values[:-1]) / (w - 1.0)


def central_difference(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Derivative of ``f`` on ``[0, 1]``; one-sided within ``h`` of an endpoint."""
    x = np.asarray(x, dtype=float)
    lo = np.maximum(x - h, 0.0)
    hi = np.minimum(x + h, 1.0)
    return (f(hi) - f(lo)) / (hi - lo)


def log_log_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def pairwise_sum(values) -> float:
    """Order-deterministic sum (``math.fsum`` is exact, hence order independent)."""
    return math.fsum(values)
