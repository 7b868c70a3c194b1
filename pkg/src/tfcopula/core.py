"""Copula evaluation interface and generic grid checks.

Every copula in the package derives from :class:`Copula`.  Evaluation is
vectorized: ``cdf``, ``partial_u`` and ``partial_v`` accept scalars or arrays
that broadcast against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from tfcopula.numerics import central_difference

UNIT_TOL = 1e-12
FD_STEP = 1e-6
GRID_TOL = 1e-10


class ParameterError(ValueError):
    """A family parameter lies outside its admissible domain."""


def as_unit(x) -> np.ndarray:
    """Return ``x`` as a float array clamped to ``[0, 1]``.

    Values more than ``1e-12`` outside the unit interval are rejected; values
    within that slack are clamped (root finders land a few ulps outside).
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("unit value is NaN")
    if np.any(arr < -UNIT_TOL) or np.any(arr > 1.0 + UNIT_TOL):
        bad = arr[(arr < -UNIT_TOL) | (arr > 1.0 + UNIT_TOL)].ravel()[0]
        raise ValueError(f"unit value {bad!r} outside [0, 1]")
    return np.clip(arr, 0.0, 1.0)


def _scalar_or_array(out: np.ndarray, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(out)
    return out


@dataclass(frozen=True)
class GridCheckReport:
    """Outcome of a sampled check.

    ``worst_violation`` is the signed worst margin for inequality checks
    (negative means violated) and the largest absolute error for identity
    checks; ``passed`` follows the convention of the producing check.
    """

    name: str
    grid_size: int
    worst_violation: float
    worst_location: tuple | None
    passed: bool
    tolerance: float
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict[str, Any]:
        loc = None if self.worst_location is None else [float(x) for x in self.worst_location]
        return {
            "name": self.name,
            "grid_size": self.grid_size,
            "worst_violation": float(self.worst_violation),
            "worst_location": loc,
            "passed": bool(self.passed),
            "tolerance": self.tolerance,
            "details": self.details,
        }


class Copula:
    """Base class for bivariate copulas.

    Subclasses implement ``_cdf`` and may implement ``_partial_u`` /
    ``_partial_v``.  When a subclass lacks analytic partials, or
    ``derivative_mode == "finite-difference"``, partials fall back to central
    differences with step ``1e-6``.
    """

    family: str = "Copula"
    exchangeable: bool = True
    derivative_mode: str = "analytic"

    @property
    def params(self) -> dict[str, float]:
        return {}

    def __call__(self, u, v):
        return self.cdf(u, v)

    def cdf(self, u, v):
        uu, vv = np.broadcast_arrays(as_unit(u), as_unit(v))
        out = np.clip(self._cdf(uu, vv), 0.0, 1.0)
        return _scalar_or_array(out, u, v)

    def _cdf(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def has_analytic_partials(self) -> bool:
        return (
            self.derivative_mode == "analytic"
            and type(self)._partial_u is not Copula._partial_u
        )

    def partial_u(self, u, v):
        """``dC/du``; on ties ``u == v`` the ``u < v`` one-sided branch is used."""
        uu, vv = np.broadcast_arrays(as_unit(u), as_unit(v))
        if self.has_analytic_partials():
            out = self._partial_u(uu, vv)
        else:
            out = central_difference(lambda x: self._cdf(x, vv), uu, FD_STEP)
        return _scalar_or_array(np.asarray(out, dtype=float), u, v)

    def partial_v(self, u, v):
        """``dC/dv``; on ties ``u == v`` the ``u < v`` one-sided branch is used."""
        uu, vv = np.broadcast_arrays(as_unit(u), as_unit(v))
        if self.has_analytic_partials():
            out = self._partial_v(uu, vv)
        else:
            out = central_difference(lambda y: self._cdf(uu, y), vv, FD_STEP)
        return _scalar_or_array(np.asarray(out, dtype=float), u, v)

    def _partial_u(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _partial_v(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict[str, Any]:
        return {"family": self.family, **self.params}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"


def eval(copula: Copula, u, v):  # noqa: A001 - mirrors the operation name
    """Evaluate ``copula`` at ``(u, v)``."""
    return copula.cdf(u, v)


def partial_u(copula: Copula, u, v):
    return copula.partial_u(u, v)


def partial_v(copula: Copula, u, v):
    return copula.partial_v(u, v)


def unit_grid(n: int) -> np.ndarray:
    """``n`` equally spaced points covering ``[0, 1]`` including both ends."""
    if n < 2:
        raise ValueError("grid size must be at least 2")
    return np.linspace(0.0, 1.0, n)


def cdf_matrix(copula: Copula, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid and the matrix ``C[i, j] = C(t_i, t_j)``."""
    t = unit_grid(n)
    return t, np.asarray(copula.cdf(t[:, None], t[None, :]))


def check_two_increasing(copula: Copula, n: int = 200, tol: float = GRID_TOL) -> GridCheckReport:
    """Rectangle volumes of every cell of the uniform ``n x n`` grid."""
    t, c = cdf_matrix(copula, n)
    vol = c[1:, 1:] - c[:-1, 1:] - c[1:, :-1] + c[:-1, :-1]
    i, j = np.unravel_index(np.argmin(vol), vol.shape)
    worst = float(vol[i, j])
    rect = (t[i], t[i + 1], t[j], t[j + 1])
    return GridCheckReport(
        "two_increasing", n, worst, rect, worst >= -tol, tol,
        {"negative_cells": int(np.sum(vol < -tol))},
    )


def check_boundary(copula: Copula, n: int = 200, tol: float = GRID_TOL) -> GridCheckReport:
    """Largest deviation from ``C(u,1)=u, C(1,v)=v, C(u,0)=C(0,v)=0``."""
    t = unit_grid(n)
    errs = {
        "C(u,1)-u": np.abs(np.asarray(copula.cdf(t, 1.0)) - t),
        "C(1,v)-v": np.abs(np.asarray(copula.cdf(1.0, t)) - t),
        "C(u,0)": np.abs(np.asarray(copula.cdf(t, 0.0))),
        "C(0,v)": np.abs(np.asarray(copula.cdf(0.0, t))),
    }
    worst, where = 0.0, None
    for label, e in errs.items():
        k = int(np.argmax(e))
        if e[k] > worst or where is None:
            worst = float(e[k])
            where = {"C(u,1)-u": (t[k], 1.0), "C(1,v)-v": (1.0, t[k]),
                     "C(u,0)": (t[k], 0.0), "C(0,v)": (0.0, t[k])}[label]
    return GridCheckReport("boundary", n, worst, where, worst <= tol, tol)


def check_frechet_bounds(copula: Copula, n: int = 200, tol: float = GRID_TOL) -> GridCheckReport:
    """Signed slack of ``W <= C <= M`` on the grid; negative means violated."""
    t, c = cdf_matrix(copula, n)
    uu, vv = np.meshgrid(t, t, indexing="ij")
    lower = np.maximum(uu + vv - 1.0, 0.0)
    upper = np.minimum(uu, vv)
    slack = np.minimum(c - lower, upper - c)
    i, j = np.unravel_index(np.argmin(slack), slack.shape)
    worst = float(slack[i, j])
    return GridCheckReport(
        "frechet_bounds", n, worst, (t[i], t[j]), worst >= -tol, tol,
        {"min_slack_upper": float(np.min(upper - c)), "min_slack_lower": float(np.min(c - lower))},
    )


def check_symmetry(copula: Copula, n: int = 200, tol: float = 1e-14) -> GridCheckReport:
    t, c = cdf_matrix(copula, n)
    d = np.abs(c - c.T)
    i, j = np.unravel_index(np.argmax(d), d.shape)
    worst = float(d[i, j])
    return GridCheckReport("symmetry", n, worst, (t[i], t[j]), worst <= tol, tol)


def check_copula(copula: Copula, n: int = 200, tol: float = GRID_TOL) -> dict[str, GridCheckReport]:
    """Boundary, Fréchet-bound and 2-increasing checks in one call."""
    return {
        "boundary": check_boundary(copula, n, tol),
        "frechet_bounds": check_frechet_bounds(copula, n, tol),
        "two_increasing": check_two_increasing(copula, n, tol),
    }
