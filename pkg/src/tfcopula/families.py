"""Base copula catalog, Archimedean generators and supermigrativity.

Parameter conventions follow the generator forms

    Clayton  varphi(t) = t**-alpha - 1
    Gumbel   varphi(t) = (-log t)**beta
    Frank    varphi(t) = -log((exp(-gamma t) - 1) / (exp(-gamma) - 1))

and the Cuadras-Augé copula ``C(u, v) = min(u,v) * max(u,v)**alpha`` (so
``alpha = 1`` is the product copula and ``alpha = 0`` the upper Fréchet bound).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from tfcopula.core import (
    Copula,
    GridCheckReport,
    ParameterError,
    as_unit,
    check_symmetry,
)
from tfcopula.numerics import bisect_increasing, central_difference

Array = np.ndarray


class Independence(Copula):
    family = "Independence"

    def _cdf(self, u, v):
        return u * v

    def _partial_u(self, u, v):
        return v + 0.0 * u

    def _partial_v(self, u, v):
        return u + 0.0 * v


class FrechetUpper(Copula):
    family = "FrechetUpper"

    def _cdf(self, u, v):
        return np.minimum(u, v)

    def _partial_u(self, u, v):
        return np.where(u <= v, 1.0, 0.0)

    def _partial_v(self, u, v):
        return np.where(u <= v, 0.0, 1.0)


class FrechetLower(Copula):
    family = "FrechetLower"

    def _cdf(self, u, v):
        return np.maximum(u + v - 1.0, 0.0)

    def _partial_u(self, u, v):
        return np.where(u + v > 1.0, 1.0, 0.0)

    def _partial_v(self, u, v):
        return np.where(u + v > 1.0, 1.0, 0.0)


@dataclass(frozen=True, repr=False)
class FGM(Copula):
    theta: float
    family = "FGM"

    def __post_init__(self):
        if not -1.0 <= self.theta <= 1.0:
            raise ParameterError(f"FGM theta must lie in [-1, 1], got {self.theta}")

    @property
    def params(self):
        return {"theta": self.theta}

    def _cdf(self, u, v):
        return u * v * (1.0 + self.theta * (1.0 - u) * (1.0 - v))

    def _partial_u(self, u, v):
        return v * (1.0 + self.theta * (1.0 - 2.0 * u) * (1.0 - v))

    def _partial_v(self, u, v):
        return u * (1.0 + self.theta * (1.0 - u) * (1.0 - 2.0 * v))


@dataclass(frozen=True, repr=False)
class CuadrasAuge(Copula):
    alpha: float
    family = "CuadrasAuge"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"Cuadras-Augé alpha must lie in [0, 1], got {self.alpha}")

    @property
    def params(self):
        return {"alpha": self.alpha}

    def _cdf(self, u, v):
        a = self.alpha
        return np.where(u <= v, u * v**a, u**a * v)

    def _partial_u(self, u, v):
        a = self.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            below = a * u ** (a - 1.0) * v
        below = np.where(v == 0.0, 0.0, below)
        return np.where(u <= v, v**a, below)

    def _partial_v(self, u, v):
        a = self.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            above = a * u * v ** (a - 1.0)
        above = np.where(u == 0.0, 0.0, above)
        return np.where(u <= v, above, u**a)


@dataclass(frozen=True)
class ArchimedeanGenerator:
    """Additive generator ``varphi: [0,1] -> [0, inf]`` with ``varphi(1) = 0``.

    ``inverse`` is the ordinary inverse on ``[0, varphi(0)]``; when omitted it
    is computed by bisection.  ``derivative`` falls back to finite differences.
    """

    varphi: Callable[[Array], Array]
    derivative: Callable[[Array], Array] | None = None
    inverse: Callable[[Array], Array] | None = None
    strict: bool = True
    label: str = "varphi"

    @property
    def at_zero(self) -> float:
        if self.strict:
            return float("inf")
        return float(self.varphi(np.array(0.0)))

    def __call__(self, t):
        with np.errstate(divide="ignore"):
            return self.varphi(np.asarray(t, dtype=float))

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        if self.derivative is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                return self.derivative(t)
        # keep the stencil away from a possible pole at 0
        return central_difference(lambda x: self(np.maximum(x, 1e-300)), t, 1e-7)

    def pseudo_inverse(self, s):
        """``varphi^[-1](s)``: the inverse on ``[0, varphi(0)]`` and 0 beyond."""
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape)
        ok = s < self.at_zero
        if np.any(ok):
            if self.inverse is not None:
                out[ok] = self.inverse(s[ok])
            else:
                out[ok] = bisect_increasing(
                    lambda t: -self(t), -s[ok], 0.0, 1.0, ftol=1e-13, max_iter=200
                )
        return np.clip(out, 0.0, 1.0)

    def validate(self, n: int = 1000, tol: float = 1e-10) -> GridCheckReport:
        """Sampled check: ``varphi(1) = 0``, strictly decreasing, convex."""
        t = np.linspace(0.0 if not self.strict else 1.0 / n, 1.0, n + 1)
        y = self(t)
        at_one = float(abs(self(np.array(1.0))))
        dec = np.diff(y)
        second = y[:-2] - 2.0 * y[1:-1] + y[2:]
        scale = np.maximum(1.0, np.abs(y[1:-1]))
        convex_margin = float(np.min(second / scale))
        worst = min(-float(np.max(dec)), convex_margin, -at_one)
        passed = at_one <= 1e-12 and bool(np.all(dec < 0)) and convex_margin >= -tol
        return GridCheckReport(
            f"archimedean_generator[{self.label}]", n, worst, None, passed, tol,
            {"varphi(1)": at_one, "max_increment": float(np.max(dec)),
             "min_second_difference": convex_margin},
        )


class ArchimedeanCopula(Copula):
    """``C(u, v) = varphi^[-1](varphi(u) + varphi(v))`` from a generator."""

    family = "GenericArchimedean"

    def __init__(self, generator: ArchimedeanGenerator):
        self.generator = generator

    @property
    def params(self):
        return {"generator": self.generator.label}

    def _cdf(self, u, v):
        g = self.generator
        return g.pseudo_inverse(g(u) + g(v))

    def _partial_u(self, u, v):
        g = self.generator
        c = self._cdf(u, v)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = g.deriv(u) / g.deriv(c)
        return np.where(c > 0.0, np.nan_to_num(out, nan=0.0, posinf=0.0), 0.0)

    def _partial_v(self, u, v):
        return self._partial_u(v, u)


def independence_generator() -> ArchimedeanGenerator:
    return ArchimedeanGenerator(
        lambda t: -np.log(t), lambda t: -1.0 / t, lambda s: np.exp(-s), True, "-log t"
    )


def lower_bound_generator() -> ArchimedeanGenerator:
    return ArchimedeanGenerator(
        lambda t: 1.0 - t, lambda t: -np.ones_like(t), lambda s: 1.0 - s, False, "1 - t"
    )


def clayton_generator(alpha: float) -> ArchimedeanGenerator:
    return ArchimedeanGenerator(
        lambda t: t**-alpha - 1.0,
        lambda t: -alpha * t ** (-alpha - 1.0),
        lambda s: (1.0 + s) ** (-1.0 / alpha),
        True,
        f"t^-{alpha} - 1",
    )


def gumbel_generator(beta: float) -> ArchimedeanGenerator:
    return ArchimedeanGenerator(
        lambda t: (-np.log(t)) ** beta,
        lambda t: -beta * (-np.log(t)) ** (beta - 1.0) / t,
        lambda s: np.exp(-(s ** (1.0 / beta))),
        True,
        f"(-log t)^{beta}",
    )


def frank_generator(gamma: float) -> ArchimedeanGenerator:
    d = np.expm1(-gamma)
    return ArchimedeanGenerator(
        lambda t: -np.log(np.expm1(-gamma * t) / d),
        lambda t: gamma * np.exp(-gamma * t) / np.expm1(-gamma * t),
        lambda s: -np.log1p(np.exp(-s) * d) / gamma,
        True,
        f"frank({gamma})",
    )


@dataclass(frozen=True, repr=False)
class Clayton(ArchimedeanCopula):
    alpha: float
    family = "Clayton"

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ParameterError(f"Clayton alpha must be > 0, got {self.alpha}")

    @property
    def generator(self):
        return clayton_generator(self.alpha)

    @property
    def params(self):
        return {"alpha": self.alpha}

    def _cdf(self, u, v):
        a = self.alpha
        with np.errstate(divide="ignore"):
            s = u**-a + v**-a - 1.0
        return s ** (-1.0 / a)

    def _partial_u(self, u, v):
        a = self.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            t = u**a * (v**-a - 1.0)
            out = (1.0 + t) ** (-(1.0 + a) / a)
        return np.where(v == 0.0, 0.0, out)

    def _partial_v(self, u, v):
        return self._partial_u(v, u)


@dataclass(frozen=True, repr=False)
class Gumbel(ArchimedeanCopula):
    beta: float
    family = "Gumbel"

    def __post_init__(self):
        if not self.beta >= 1.0:
            raise ParameterError(f"Gumbel beta must be >= 1, got {self.beta}")

    @property
    def generator(self):
        return gumbel_generator(self.beta)

    @property
    def params(self):
        return {"beta": self.beta}

    def _cdf(self, u, v):
        b = self.beta
        with np.errstate(divide="ignore"):
            s = (-np.log(u)) ** b + (-np.log(v)) ** b
        return np.exp(-(s ** (1.0 / b)))

    def _partial_u(self, u, v):
        b = self.beta
        with np.errstate(divide="ignore", invalid="ignore"):
            x, y = -np.log(u), -np.log(v)
            s = x**b + y**b
            c = np.exp(-(s ** (1.0 / b)))
            out = c * s ** (1.0 / b - 1.0) * x ** (b - 1.0) / u
        out = np.where((u == 0.0) | (v == 0.0), 0.0, out)
        return np.where((u == 1.0) & (v == 1.0), 1.0, np.nan_to_num(out, nan=0.0))

    def _partial_v(self, u, v):
        return self._partial_u(v, u)


@dataclass(frozen=True, repr=False)
class Frank(ArchimedeanCopula):
    gamma: float
    family = "Frank"

    def __post_init__(self):
        if self.gamma == 0.0 or not np.isfinite(self.gamma):
            raise ParameterError("Frank gamma must be finite and nonzero")

    @property
    def generator(self):
        return frank_generator(self.gamma)

    @property
    def params(self):
        return {"gamma": self.gamma}

    def _cdf(self, u, v):
        g = self.gamma
        return -np.log1p(np.expm1(-g * u) * np.expm1(-g * v) / np.expm1(-g)) / g

    def _partial_u(self, u, v):
        g = self.gamma
        a, b = np.expm1(-g * u), np.expm1(-g * v)
        return np.exp(-g * u) * b / (np.expm1(-g) + a * b)

    def _partial_v(self, u, v):
        return self._partial_u(v, u)


def make_archimedean(gen: ArchimedeanGenerator, n: int = 1000) -> ArchimedeanCopula:
    """Archimedean copula from ``gen`` after a sampled validity check."""
    report = gen.validate(n)
    if not report.passed:
        raise ParameterError(f"invalid Archimedean generator {gen.label!r}: {report.details}")
    return ArchimedeanCopula(gen)


FAMILIES: dict[str, tuple[type, tuple[str, ...]]] = {
    "Independence": (Independence, ()),
    "FrechetUpper": (FrechetUpper, ()),
    "FrechetLower": (FrechetLower, ()),
    "FGM": (FGM, ("theta",)),
    "Clayton": (Clayton, ("alpha",)),
    "Gumbel": (Gumbel, ("beta",)),
    "Frank": (Frank, ("gamma",)),
    "CuadrasAuge": (CuadrasAuge, ("alpha",)),
}

ARCHIMEDEAN_FAMILIES = ("Independence", "FrechetLower", "Clayton", "Gumbel", "Frank", "GenericArchimedean")


def make_family(family: str, **params: float) -> Copula:
    """Instantiate a catalog family by name with keyword parameters."""
    try:
        cls, keys = FAMILIES[family]
    except KeyError:
        raise ParameterError(f"unknown copula family {family!r}") from None
    if set(params) != set(keys):
        raise ParameterError(f"{family} expects parameters {list(keys)}, got {sorted(params)}")
    return cls(**{k: float(params[k]) for k in keys})


def eval_family(family: str, params: dict, u, v):
    """Closed-form evaluation of a catalog family."""
    return make_family(family, **params).cdf(u, v)


def archimedean_generator_of(copula: Copula) -> ArchimedeanGenerator | None:
    """The additive generator of an Archimedean catalog member, else ``None``."""
    if isinstance(copula, ArchimedeanCopula):
        return copula.generator
    if isinstance(copula, Independence):
        return independence_generator()
    if isinstance(copula, FrechetLower):
        return lower_bound_generator()
    return None


def check_supermigrative(copula: Copula, n: int = 40, tol: float = 1e-10) -> GridCheckReport:
    """Check ``C(a x, y) >= C(x, a y)`` on an ``n^3`` lattice with ``y <= x``.

    Raises ``ValueError`` when the copula is not exchangeable on a grid.
    """
    sym = check_symmetry(copula, n=max(n, 50), tol=1e-12)
    if not sym.passed:
        raise ValueError(f"{copula!r} is not exchangeable (asymmetry {sym.worst_violation:.3g})")
    g = np.linspace(0.0, 1.0, n)
    a, x, y = np.meshgrid(g, g, g, indexing="ij")
    keep = y <= x
    a, x, y = a[keep], x[keep], y[keep]
    margin = np.asarray(copula.cdf(as_unit(a * x), y)) - np.asarray(copula.cdf(x, as_unit(a * y)))
    k = int(np.argmin(margin))
    worst = float(margin[k])
    return GridCheckReport(
        "supermigrative", n, worst, (a[k], x[k], y[k]), worst >= -tol, tol,
        {"triples": int(margin.size)},
    )
