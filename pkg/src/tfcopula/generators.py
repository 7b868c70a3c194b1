"""Monotone maps ``phi``/``psi`` on [0, 1], pseudo-inverses and pair checks."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from tfcopula.core import Copula, GridCheckReport, as_unit
from tfcopula.numerics import bisect_increasing, central_difference

STRICT = "StrictlyIncreasing"
INCREASING = "Increasing"
SAMPLE_N = 1000


def _scalar_or_array(out, t):
    return float(out) if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class MonotoneMap:
    """Continuous increasing map ``[0, 1] -> [0, 1]`` with ``f(1) = 1``.

    ``df`` and ``f_inv`` are optional; missing derivatives are taken by central
    differences and missing inverses by bisection.  ``spec`` is the JSON
    descriptor the map was built from, when there is one.
    """

    f: Callable[[np.ndarray], np.ndarray]
    label: str
    df: Callable[[np.ndarray], np.ndarray] | None = None
    f_inv: Callable[[np.ndarray], np.ndarray] | None = None
    strictness: str = STRICT
    spec: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        at_one = float(self.f(np.array(1.0)))
        if abs(at_one - 1.0) > 1e-12:
            raise ValueError(f"map {self.label!r} has f(1) = {at_one!r}, expected 1")

    def __call__(self, t):
        t = as_unit(t)
        return _scalar_or_array(np.clip(self.f(t), 0.0, 1.0), t)

    @property
    def f_at_0(self) -> float:
        return float(self.f(np.array(0.0)))

    def deriv(self, t):
        t = as_unit(t)
        if self.df is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = self.df(t)
        else:
            out = central_difference(self.f, t, 1e-6)
        return _scalar_or_array(np.asarray(out, dtype=float), t)

    def pseudo_inverse(self, t):
        """0 on ``[0, f(0)]``, the inverse of ``f`` on ``[f(0), 1]``."""
        t = as_unit(t)
        shape = np.shape(t)
        t = np.atleast_1d(t)
        out = np.zeros(t.shape)
        ok = t > self.f_at_0
        if np.any(ok):
            if self.f_inv is not None:
                out[ok] = self.f_inv(t[ok])
            else:
                out[ok] = bisect_increasing(self.f, t[ok], 0.0, 1.0, ftol=1e-13, max_iter=200)
        out = np.clip(out, 0.0, 1.0).reshape(shape)
        return float(out) if out.ndim == 0 else out

    def describe(self) -> dict:
        return dict(self.spec) if self.spec else {"kind": "custom", "label": self.label}


def pseudo_inverse(m: MonotoneMap, t):
    return m.pseudo_inverse(t)


def power(beta: float) -> MonotoneMap:
    """``t**beta``; ``beta = 0`` gives the constant 1 (a member of Psi only)."""
    if beta < 0:
        raise ValueError("power exponent must be >= 0")
    if beta == 0:
        return MonotoneMap(lambda t: np.ones_like(t), "1", lambda t: np.zeros_like(t),
                           None, INCREASING, {"kind": "power", "beta": 0.0})
    return MonotoneMap(
        lambda t: t**beta,
        f"t^{beta:g}",
        lambda t: beta * t ** (beta - 1.0),
        lambda s: s ** (1.0 / beta),
        STRICT,
        {"kind": "power", "beta": float(beta)},
    )


def identity() -> MonotoneMap:
    return power(1.0)


def ca_map(beta: float, gamma: float) -> MonotoneMap:
    """``t**beta * (2 - t**gamma)``, increasing for ``0 <= gamma <= beta``."""
    if not 0 <= gamma <= beta:
        raise ValueError("ca map needs 0 <= gamma <= beta")

    def df(t):
        return beta * t ** (beta - 1.0) * (2.0 - t**gamma) - gamma * t ** (beta + gamma - 1.0)

    return MonotoneMap(
        lambda t: t**beta * (2.0 - t**gamma),
        f"t^{beta:g}(2-t^{gamma:g})",
        df,
        None,
        STRICT if beta > 0 else INCREASING,
        {"kind": "ca", "beta": float(beta), "gamma": float(gamma)},
    )


def affine(alpha: float) -> MonotoneMap:
    """``(1 - alpha) t + alpha`` with ``alpha`` in ``[0, 1]``."""
    if not 0 <= alpha <= 1:
        raise ValueError("affine alpha must lie in [0, 1]")
    slope = 1.0 - alpha
    return MonotoneMap(
        lambda t: slope * t + alpha,
        f"{slope:g}t+{alpha:g}",
        lambda t: slope + 0.0 * t,
        (lambda s: (s - alpha) / slope) if slope > 0 else None,
        STRICT if slope > 0 else INCREASING,
        {"kind": "affine", "alpha": float(alpha)},
    )


def exp_linear(c: float) -> MonotoneMap:
    """``exp(-c (1 - t))``, i.e. ``exp(-lambda(t))`` with ``lambda(t) = c (1 - t)``."""
    if c <= 0:
        raise ValueError("exp-linear rate must be > 0")
    return MonotoneMap(
        lambda t: np.exp(-c * (1.0 - t)),
        f"exp(-{c:g}(1-t))",
        lambda t: c * np.exp(-c * (1.0 - t)),
        lambda s: 1.0 + np.log(s) / c,
        STRICT,
        {"kind": "exp-linear", "c": float(c)},
    )


def from_additive(lam: Callable, dlam: Callable | None = None, label: str = "lambda",
                  strict: bool = True) -> MonotoneMap:
    """``exp(-lam(t))`` for a decreasing additive generator with ``lam(1) = 0``."""

    def f(t):
        with np.errstate(divide="ignore"):
            return np.exp(-lam(t))

    df = None
    if dlam is not None:
        def df(t):
            with np.errstate(divide="ignore", invalid="ignore"):
                return -dlam(t) * np.exp(-lam(t))

    return MonotoneMap(f, f"exp(-{label})", df, None, STRICT if strict else INCREASING)


def table(ts, values, label: str = "table") -> MonotoneMap:
    """Piecewise-linear map through ``(ts[i], values[i])``."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) <= 0):
        raise ValueError("table abscissae must increase from 0 to 1")
    strict = bool(np.all(np.diff(values) > 0))
    return MonotoneMap(
        lambda t: np.interp(t, ts, values),
        label,
        None,
        (lambda s: np.interp(s, values, ts)) if strict else None,
        STRICT if strict else INCREASING,
        {"kind": "table", "t": ts.tolist(), "values": values.tolist()},
    )


MAP_KINDS = {
    "power": (power, ("beta",)),
    "ca": (ca_map, ("beta", "gamma")),
    "affine": (affine, ("alpha",)),
    "exp-linear": (exp_linear, ("c",)),
}


def map_from_descriptor(desc: dict) -> MonotoneMap:
    """Build a map from a JSON descriptor such as ``{"kind": "power", "beta": 0.8}``."""
    desc = dict(desc)
    kind = desc.pop("kind", None)
    if kind == "table":
        if set(desc) != {"t", "values"}:
            raise ValueError("table map needs exactly 't' and 'values'")
        return table(desc["t"], desc["values"])
    if kind not in MAP_KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    fn, keys = MAP_KINDS[kind]
    if set(desc) != set(keys):
        raise ValueError(f"generator kind {kind!r} expects {list(keys)}, got {sorted(desc)}")
    return fn(*(float(desc[k]) for k in keys))


def _sample(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n + 1)


def _continuity_ratio(m: MonotoneMap, n: int) -> float:
    # the largest step must shrink under refinement for a continuous map
    coarse = np.max(np.abs(np.diff(m.f(_sample(n)))))
    fine = np.max(np.abs(np.diff(m.f(_sample(8 * n)))))
    return float(fine / coarse) if coarse > 0 else 0.0


def check_phi_membership(m: MonotoneMap, n: int = SAMPLE_N, concave: bool = True,
                         strict: bool = True, tol: float = 1e-10) -> GridCheckReport:
    """Sampled membership in Phi (``strict``) or Psi, plus optional concavity.

    ``worst_violation`` is the most negative of: smallest increment (for
    strict monotonicity) or increment plus tolerance, ``-|f(1) - 1|`` and, with
    ``concave``, the negated largest second difference.
    """
    t = _sample(n)
    y = np.asarray(m.f(t), dtype=float)
    inc = np.diff(y)
    second = y[:-2] - 2.0 * y[1:-1] + y[2:]
    at_one = abs(float(y[-1]) - 1.0)
    ratio = _continuity_ratio(m, n)
    in_range = bool(np.all((y >= -1e-12) & (y <= 1 + 1e-12)))
    monotone = bool(np.all(inc > 0)) if strict else bool(np.all(inc >= -tol))
    margins = {"min_increment": float(np.min(inc)), "f(1)-1": -at_one}
    ok = monotone and at_one <= 1e-12 and ratio < 0.99 and in_range
    if concave:
        worst_second = float(np.max(second))
        margins["max_second_difference"] = worst_second
        ok = ok and worst_second <= tol
    worst = min(margins["min_increment"], -at_one,
                -margins.get("max_second_difference", -np.inf))
    k = int(np.argmax(second)) + 1 if concave else int(np.argmin(inc))
    return GridCheckReport(
        f"{'phi' if strict else 'psi'}_membership[{m.label}]", n, worst, (t[k],), ok, tol,
        {**margins, "continuity_ratio": ratio, "concave_checked": concave},
    )


def check_psi_membership(m: MonotoneMap, n: int = SAMPLE_N) -> GridCheckReport:
    return check_phi_membership(m, n, concave=False, strict=False)


def check_condition_d1(phi: MonotoneMap, psi: MonotoneMap, base: Copula, n: int = 200,
                       tol: float = 1e-10) -> GridCheckReport:
    """``C(phi(u), psi(v)) <= C(phi(v), psi(u))`` over ``u <= v`` on an ``n x n`` grid."""
    t = np.linspace(0.0, 1.0, n)
    iu, iv = np.triu_indices(n)
    u, v = t[iu], t[iv]
    pu, pv, su, sv = phi(u), phi(v), psi(u), psi(v)
    margin = np.asarray(base.cdf(pv, su)) - np.asarray(base.cdf(pu, sv))
    k = int(np.argmin(margin))
    worst = float(margin[k])
    return GridCheckReport("condition_d1", n, worst, (u[k], v[k]), worst >= -tol, tol)


def check_ratio_increasing(phi: MonotoneMap, psi: MonotoneMap, n: int = SAMPLE_N,
                           eps: float = 1e-6, tol: float = 1e-10) -> GridCheckReport:
    """Sampled monotonicity of ``phi / psi`` on ``[eps, 1]``."""
    t = np.linspace(eps, 1.0, n + 1)
    den = np.asarray(psi(t))
    if np.any(den <= 0):
        raise ValueError("psi must be positive on (0, 1] for the ratio check")
    r = np.asarray(phi(t)) / den
    d = np.diff(r)
    k = int(np.argmin(d))
    worst = float(d[k])
    return GridCheckReport("ratio_increasing", n, worst, (t[k], t[k + 1]), worst >= -tol, tol)


@dataclass(frozen=True)
class ConditionCertificate:
    """Evidence gathered when a pair was gated for a base copula."""

    method: str
    base_family: str
    phi_concave: GridCheckReport | None = None
    d1_holds: GridCheckReport | None = None
    ratio_increasing: GridCheckReport | None = None
    supermigrative: GridCheckReport | None = None
    direct: dict | None = None

    @property
    def valid(self) -> bool:
        if self.method == "D1Direct":
            return bool(self.phi_concave and self.d1_holds)
        if self.method == "SupermigrativeRatio":
            return bool(self.phi_concave and self.ratio_increasing and self.supermigrative)
        if self.method == "DirectTwoIncreasing":
            return bool(self.direct) and all(r.passed for r in self.direct.values())
        return False

    def to_dict(self) -> dict:
        out = {"method": self.method, "base_family": self.base_family, "valid": self.valid}
        for name in ("phi_concave", "d1_holds", "ratio_increasing", "supermigrative"):
            rep = getattr(self, name)
            if rep is not None:
                out[name] = rep.to_dict()
        if self.direct:
            out["direct"] = {k: r.to_dict() for k, r in self.direct.items()}
        return out


@dataclass(frozen=True)
class GeneratorPair:
    phi: MonotoneMap
    psi: MonotoneMap
    certificate: ConditionCertificate | None = None

    def uncertified(self) -> "GeneratorPair":
        return replace(self, certificate=None)

    def describe(self) -> dict:
        return {"phi": self.phi.describe(), "psi": self.psi.describe()}


def _composed(m: MonotoneMap, f: MonotoneMap) -> MonotoneMap:
    df = None
    if m.df is not None and f.df is not None:
        def df(t):
            return m.df(f.f(t)) * f.df(t)
    inv = None
    if m.f_inv is not None and f.f_inv is not None:
        def inv(s):
            return f.f_inv(np.clip(m.f_inv(s), 0.0, 1.0))
    strict = STRICT if m.strictness == STRICT and f.strictness == STRICT else INCREASING
    return MonotoneMap(lambda t: m.f(f.f(t)), f"{m.label}∘{f.label}", df, inv, strict)


def compose(pair: GeneratorPair, f: MonotoneMap) -> GeneratorPair:
    """``(phi o f, psi o f)``; the result carries no certificate."""
    if not check_phi_membership(f, concave=False).passed:
        raise ValueError(f"inner map {f.label!r} is not strictly increasing with f(1)=1")
    return GeneratorPair(_composed(pair.phi, f), _composed(pair.psi, f))


def _pointwise_max(a: MonotoneMap, b: MonotoneMap) -> MonotoneMap:
    def df(t):
        return np.where(a.f(t) >= b.f(t), a.deriv(t), b.deriv(t))

    strict = STRICT if a.strictness == STRICT and b.strictness == STRICT else INCREASING
    return MonotoneMap(lambda t: np.maximum(a.f(t), b.f(t)), f"max({a.label},{b.label})",
                       df, None, strict)


def _same_map(a: MonotoneMap, b: MonotoneMap, n: int = SAMPLE_N) -> bool:
    t = _sample(n)
    return bool(np.all(np.asarray(a.f(t)) == np.asarray(b.f(t))))


def max_phi(p1: GeneratorPair, p2: GeneratorPair) -> GeneratorPair:
    """``(max(phi1, phi2), psi)`` for pairs sharing ``psi``; uncertified."""
    if not _same_map(p1.psi, p2.psi):
        raise ValueError("max_phi needs both pairs to share the same psi")
    if p1.phi is p2.phi:
        return p1.uncertified()
    return GeneratorPair(_pointwise_max(p1.phi, p2.phi), p1.psi)


def max_psi(p1: GeneratorPair, p2: GeneratorPair) -> GeneratorPair:
    """``(phi, max(psi1, psi2))`` for pairs sharing ``phi``; uncertified."""
    if not _same_map(p1.phi, p2.phi):
        raise ValueError("max_psi needs both pairs to share the same phi")
    if p1.psi is p2.psi:
        return p1.uncertified()
    return GeneratorPair(p1.phi, _pointwise_max(p1.psi, p2.psi))


# presets for the four generator pairs of the Archimedean numerical study
PRESET_PAIRS = {
    "a": ({"kind": "power", "beta": 0.8}, {"kind": "power", "beta": 0.5}),
    "b": ({"kind": "power", "beta": 2.0 / 3.0}, {"kind": "power", "beta": 0.5}),
    "c": ({"kind": "power", "beta": 0.5}, {"kind": "power", "beta": 0.5}),
    "d": ({"kind": "power", "beta": 1.0}, {"kind": "power", "beta": 1.0}),
}


def preset_pair(name: str) -> GeneratorPair:
    try:
        phi, psi = PRESET_PAIRS[name]
    except KeyError:
        raise ValueError(f"unknown preset pair {name!r}; choose from a, b, c, d") from None
    return GeneratorPair(map_from_descriptor(phi), map_from_descriptor(psi))
