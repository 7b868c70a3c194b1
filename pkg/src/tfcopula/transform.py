"""Transformed copulas ``phi^[-1](C(phi(min(u,v)), psi(max(u,v))))``.

Construction is gated either by the sufficient conditions on ``(phi, psi)``
(concave ``phi`` plus the d1 inequality, or a supermigrative base with
increasing ``phi/psi``) or directly by grid checks of the candidate function.
The module also splits the copula into its diagonal singular part and its
absolutely continuous part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from tfcopula import closed_forms
from tfcopula.core import (
    Copula,
    GridCheckReport,
    as_unit,
    check_boundary,
    check_two_increasing,
)
from tfcopula.families import (
    Independence,
    archimedean_generator_of,
    check_supermigrative,
)
from tfcopula.generators import (
    ConditionCertificate,
    GeneratorPair,
    MonotoneMap,
    check_condition_d1,
    check_phi_membership,
    check_psi_membership,
    check_ratio_increasing,
    from_additive,
)
from tfcopula.numerics import adaptive_simpson, bisect_increasing

THEOREM_GATE = "theorem"
DIRECT_GATE = "direct"
QUAD_LOWER = 1e-9
QUAD_TOL = 1e-9
ONE_SIDED_EPS = 1e-7


class ValidationError(ValueError):
    """The generator pair failed the requested validity gate."""

    def __init__(self, condition: str, report: GridCheckReport | None = None):
        self.condition = condition
        self.report = report
        msg = f"validation failed: {condition}"
        if report is not None:
            loc = ", ".join(f"{float(x):.4g}" for x in (report.worst_location or ()))
            msg += f" (worst {report.worst_violation:.3g} at ({loc}))"
        super().__init__(msg)


class OutsideSupportError(ValueError):
    """Point where the inner value does not exceed ``phi(0)``."""


class PreconditionError(ValueError):
    """Operation requires ``phi(0) = 0``."""


class TransformedCopula(Copula):
    family = "Transformed"
    exchangeable = True

    def __init__(self, base: Copula, pair: GeneratorPair,
                 validation: ConditionCertificate | None = None,
                 closed_form: closed_forms.ClosedForm | None = None):
        self.base = base
        self.pair = pair
        self.validation = validation
        self.closed_form = closed_form

    @property
    def phi(self) -> MonotoneMap:
        return self.pair.phi

    @property
    def psi(self) -> MonotoneMap:
        return self.pair.psi

    @property
    def params(self):
        return {"base": self.base.describe(), **self.pair.describe()}

    def __repr__(self) -> str:
        return f"TransformedCopula({self.base!r}, phi={self.phi.label}, psi={self.psi.label})"

    def inner(self, u, v):
        """``C(phi(min), psi(max))``, the argument handed to ``phi^[-1]``."""
        m, mx = np.minimum(u, v), np.maximum(u, v)
        return np.asarray(self.base.cdf(self.phi(m), self.psi(mx)), dtype=float)

    def _cdf(self, u, v):
        return np.asarray(self.phi.pseudo_inverse(self.inner(u, v)), dtype=float)

    def has_analytic_partials(self) -> bool:
        return True

    def _partial_u(self, u, v):
        return _conditional(self, u, v)

    def _partial_v(self, u, v):
        return _conditional(self, v, u)

    @property
    def analytic(self) -> bool:
        return (self.base.has_analytic_partials() and self.phi.df is not None
                and self.psi.df is not None)


def _branches(tf: TransformedCopula, u, v):
    """Upper (``u < v``) and lower (``u > v``) branch numerators of ``dC/du``."""
    phi, psi, base = tf.phi, tf.psi, tf.base
    pu, pv, su, sv = phi(u), phi(v), psi(u), psi(v)
    up = np.asarray(base.partial_u(pu, sv)) * np.asarray(phi.deriv(u))
    lo = np.asarray(base.partial_v(pv, su)) * np.asarray(psi.deriv(u))
    return up, lo


def _conditional(tf: TransformedCopula, u, v) -> np.ndarray:
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    inner = tf.inner(u, v)
    k = np.asarray(tf.phi.pseudo_inverse(inner), dtype=float)
    up, lo = _branches(tf, u, v)
    num = np.where(u <= v, up, lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / np.asarray(tf.phi.deriv(k))
    out = np.where(inner > tf.phi.f_at_0, out, 0.0)
    out = np.nan_to_num(out, nan=0.0, posinf=0.0)
    return np.clip(out, 0.0, 1.0)


def conditional_cdf(tf: TransformedCopula, u, v, strict: bool = False):
    """``P(V <= v | U = u)``; at ``v == u`` the limit from above (atom included).

    Points whose inner value does not exceed ``phi(0)`` return 0; with
    ``strict=True`` they raise :class:`OutsideSupportError` instead.
    """
    uu, vv = np.broadcast_arrays(as_unit(u), as_unit(v))
    if strict and np.any(tf.inner(uu, vv) <= tf.phi.f_at_0):
        raise OutsideSupportError("point lies outside the set where the transform exceeds phi(0)")
    out = _conditional(tf, uu, vv)
    return float(out) if np.ndim(u) == 0 and np.ndim(v) == 0 else out


def one_sided_limits(tf: TransformedCopula, u) -> tuple[np.ndarray, np.ndarray]:
    """``(F(u- | u), F(u+ | u))``, the conditional CDF just below and above ``v = u``.

    With analytic partials both limits come from the branch formulas at
    ``v = u``; otherwise from offsets ``u -/+ eps`` and ``u -/+ 2 eps`` combined
    by linear Richardson extrapolation.
    """
    u = np.asarray(u, dtype=float)
    k = np.asarray(tf.phi.pseudo_inverse(tf.inner(u, u)), dtype=float)
    inside = tf.inner(u, u) > tf.phi.f_at_0
    if tf.analytic:
        up, lo = _branches(tf, u, u)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.asarray(tf.phi.deriv(k))
            f_plus, f_minus = up / d, lo / d
    else:
        e = ONE_SIDED_EPS
        f = lambda x: _conditional(tf, u, np.clip(x, 0.0, 1.0))  # noqa: E731
        f_plus = 2.0 * f(u + e) - f(u + 2 * e)
        f_minus = 2.0 * f(u - e) - f(u - 2 * e)
    f_plus = np.where(inside, np.nan_to_num(f_plus, nan=0.0, posinf=0.0), 0.0)
    f_minus = np.where(inside, np.nan_to_num(f_minus, nan=0.0, posinf=0.0), 0.0)
    return np.clip(f_minus, 0.0, 1.0), np.clip(f_plus, 0.0, 1.0)


def diagonal_jump(tf: TransformedCopula, u, strict: bool = False):
    """Atom ``P(V = u | U = u)`` of the conditional law on the diagonal."""
    uu = as_unit(u)
    if strict and np.any(tf.inner(uu, uu) <= tf.phi.f_at_0):
        raise OutsideSupportError("diagonal point outside the support set")
    lo, hi = one_sided_limits(tf, uu)
    out = hi - lo
    return float(out) if np.ndim(u) == 0 else out


@dataclass(frozen=True)
class SingularDecomposition:
    singular_mass: float
    ac_mass: float
    method: str
    jump_grid: np.ndarray = field(repr=False)
    jump_values: np.ndarray = field(repr=False)
    closed_form_mass: float | None = None
    closed_form_tag: str | None = None

    def jump_profile(self, u):
        return np.interp(u, self.jump_grid, self.jump_values)

    def to_dict(self) -> dict:
        return {
            "singular_mass": self.singular_mass,
            "ac_mass": self.ac_mass,
            "method": self.method,
            "closed_form_mass": self.closed_form_mass,
            "closed_form_tag": self.closed_form_tag,
            "min_jump": float(np.min(self.jump_values)),
        }


def _require_zero_at_origin(tf: TransformedCopula):
    if tf.phi.f_at_0 != 0.0:
        raise PreconditionError(f"phi(0) = {tf.phi.f_at_0:g} > 0; diagonal decomposition needs phi(0) = 0")


def _jump_scalar(tf: TransformedCopula) -> Callable[[float], float]:
    def j(s: float) -> float:
        s = min(s, 1.0 - 1e-12)
        return float(diagonal_jump(tf, np.array(s)))
    return j


def singular_cdf(tf: TransformedCopula, m: float, tol: float = QUAD_TOL) -> float:
    """``S(m, m)``: diagonal mass on ``[0, m]`` by adaptive Simpson."""
    _require_zero_at_origin(tf)
    if m <= QUAD_LOWER:
        return 0.0
    return adaptive_simpson(_jump_scalar(tf), QUAD_LOWER, float(m), tol, max_depth=30)


def singular_mass(tf: TransformedCopula, tol: float = QUAD_TOL, agree_tol: float = 1e-6,
                  profile_points: int = 101) -> SingularDecomposition:
    """Total diagonal mass ``P(U = V)`` by quadrature of the diagonal jump.

    When a closed form is registered for ``tf`` the two values must agree within
    ``agree_tol``; a disagreement raises ``RuntimeError``.
    """
    _require_zero_at_origin(tf)
    mass = singular_cdf(tf, 1.0, tol)
    grid = np.linspace(0.0, 1.0, profile_points)
    inner_grid = np.clip(grid, QUAD_LOWER, 1.0 - 1e-12)
    values = np.asarray(diagonal_jump(tf, inner_grid))
    cf = tf.closed_form
    if cf is not None and abs(cf.mass - mass) > agree_tol:
        raise RuntimeError(
            f"quadrature mass {mass:.10f} disagrees with closed form {cf.mass:.10f} ({cf.tag})"
        )
    return SingularDecomposition(
        singular_mass=mass,
        ac_mass=1.0 - mass,
        method="Quadrature",
        jump_grid=grid,
        jump_values=values,
        closed_form_mass=None if cf is None else cf.mass,
        closed_form_tag=None if cf is None else cf.tag,
    )


def singular_component(tf: TransformedCopula, u: float, v: float, tol: float = QUAD_TOL) -> float:
    """``S(u, v)``, the singular part of the copula at ``(u, v)``."""
    return singular_cdf(tf, min(u, v), tol)


def ac_component(tf: TransformedCopula, u: float, v: float, tol: float = QUAD_TOL) -> float:
    """``A(u, v)``, the absolutely continuous part.

    The density integral over ``[0,u] x [0,v]`` is carried out with the inner
    ``t`` integral in closed form: integrating the off-diagonal density in
    ``t`` returns the conditional CDF minus the diagonal atom, so
    ``A(u, v) = C(u, v) - S(min(u, v))``.
    """
    _require_zero_at_origin(tf)
    return float(tf.cdf(u, v)) - singular_cdf(tf, min(u, v), tol)


def ac_density(tf: TransformedCopula, u, v, h: float = 1e-5, band: float = 1e-4):
    """Mixed density off the diagonal from differences of the conditional CDF.

    Returns NaN within ``band`` of the diagonal, where no density exists.
    """
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    lo = np.clip(v - h, 0.0, 1.0)
    hi = np.clip(v + h, 0.0, 1.0)
    d = (_conditional(tf, u, hi) - _conditional(tf, u, lo)) / (hi - lo)
    return np.where(np.abs(u - v) < band, np.nan, d)


def singular_support_check(tf: TransformedCopula, n: int = 99, tol: float = 1e-12) -> GridCheckReport:
    """Locate the diagonal singular set and compare with the generator criterion.

    At ``n`` interior diagonal points the derivative inequality
    ``C1(phi, psi) phi' > C2(phi, psi) psi'`` and the support condition
    ``C(phi(u), psi(u)) > phi(0)`` are evaluated.  For an Archimedean base the
    sufficient criterion "``varphi o psi - varphi o phi`` strictly increasing"
    is also sampled; ``passed`` means the two verdicts agree.
    """
    u = np.arange(1, n + 1) / (n + 1.0)
    phi, psi, base = tf.phi, tf.psi, tf.base
    x, y = phi(u), psi(u)
    lhs = np.asarray(base.partial_u(x, y)) * np.asarray(phi.deriv(u))
    rhs = np.asarray(base.partial_v(x, y)) * np.asarray(psi.deriv(u))
    margin = lhs - rhs
    in_s1 = np.asarray(base.cdf(x, y)) > phi.f_at_0
    in_s2 = margin > tol * np.maximum(1.0, np.abs(lhs))
    in_s = in_s1 & in_s2
    details = {"points": n, "fraction_in_S": float(np.mean(in_s)),
               "nonempty": bool(in_s.any()), "all_points": bool(in_s.all())}
    gen = archimedean_generator_of(base)
    passed = True
    if gen is not None:
        h = np.asarray(gen(y)) - np.asarray(gen(x))
        criterion = bool(np.all(np.diff(h) > 0))
        details["archimedean_criterion"] = criterion
        passed = criterion == bool(in_s.all())
    k = int(np.argmin(margin))
    return GridCheckReport("singular_support", n, float(margin[k]), (u[k], u[k]), passed, tol, details)


def _theorem_certificate(base: Copula, pair: GeneratorPair, n: int) -> ConditionCertificate:
    phi_rep = check_phi_membership(pair.phi, concave=True)
    psi_rep = check_psi_membership(pair.psi)
    if not psi_rep.passed:
        raise ValidationError("psi is not a continuous increasing map with psi(1) = 1", psi_rep)
    if pair.phi.strictness != "StrictlyIncreasing" or phi_rep.details["min_increment"] <= 0:
        raise ValidationError("phi is not strictly increasing", phi_rep)
    if phi_rep.details["max_second_difference"] > phi_rep.tolerance:
        raise ValidationError("phi is not concave", phi_rep)
    if not phi_rep.passed:
        raise ValidationError("phi is not a continuous map onto [phi(0), 1] with phi(1) = 1", phi_rep)
    d1 = check_condition_d1(pair.phi, pair.psi, base, n)
    if d1.passed:
        return ConditionCertificate("D1Direct", base.family, phi_rep, d1)
    try:
        ratio = check_ratio_increasing(pair.phi, pair.psi)
    except ValueError:
        ratio = None
    if ratio is not None and ratio.passed:
        try:
            sm = check_supermigrative(base)
        except ValueError:
            sm = None
        if sm is not None and sm.passed:
            return ConditionCertificate("SupermigrativeRatio", base.family, phi_rep, d1, ratio, sm)
    raise ValidationError("condition d1 fails", d1)


def _direct_certificate(tf: TransformedCopula, n: int) -> ConditionCertificate:
    reports = {
        "boundary": check_boundary(tf, n),
        "two_increasing": check_two_increasing(tf, n),
    }
    for name, rep in reports.items():
        if not rep.passed:
            raise ValidationError(f"direct grid gate: {name} check fails", rep)
    return ConditionCertificate("DirectTwoIncreasing", tf.base.family, direct=reports)


def build(base: Copula, pair: GeneratorPair, mode: str = THEOREM_GATE, n: int = 200) -> TransformedCopula:
    """Build and certify a transformed copula.

    ``mode="theorem"`` requires concave ``phi`` together with either the d1
    inequality on the grid or a supermigrative base with increasing
    ``phi/psi``.  ``mode="direct"`` requires the candidate itself to pass the
    boundary and 2-increasing grid checks.  Raises :class:`ValidationError`
    naming the first failed condition.
    """
    cf = closed_forms.lookup(base, pair.phi.spec, pair.psi.spec)
    if mode == THEOREM_GATE:
        cert = _theorem_certificate(base, pair, n)
        return TransformedCopula(base, GeneratorPair(pair.phi, pair.psi, cert), cert, cf)
    if mode == DIRECT_GATE:
        candidate = TransformedCopula(base, pair.uncertified(), None, cf)
        cert = _direct_certificate(candidate, n)
        return TransformedCopula(base, GeneratorPair(pair.phi, pair.psi, cert), cert, cf)
    raise ValueError(f"unknown gate {mode!r}")


def candidate(base: Copula, pair: GeneratorPair) -> TransformedCopula:
    """The transformed function without any validity gate (may not be a copula)."""
    return TransformedCopula(base, pair.uncertified(), None,
                             closed_forms.lookup(base, pair.phi.spec, pair.psi.spec))


def eval(tf: TransformedCopula, u, v):  # noqa: A001
    return tf.cdf(u, v)


def archimedean_shortcut(tf: TransformedCopula, u, v):
    """Evaluate a TF-Archimedean copula through the composed generator.

    Uses ``(varphi o phi)^[-1]((varphi o phi)(min) + (varphi o psi)(max))`` with
    the pseudo-inverse of the composition computed by bisection on ``[0, 1]``.
    """
    gen = archimedean_generator_of(tf.base)
    if gen is None:
        raise ValueError("base copula is not Archimedean")
    u, v = np.broadcast_arrays(as_unit(u), as_unit(v))
    m, mx = np.minimum(u, v).ravel(), np.maximum(u, v).ravel()
    g_phi = lambda t: np.asarray(gen(tf.phi(t)), dtype=float)  # noqa: E731
    s = g_phi(m) + np.asarray(gen(tf.psi(mx)), dtype=float)
    out = np.zeros_like(s)
    ok = s < g_phi(np.array(0.0))
    if np.any(ok):
        out[ok] = bisect_increasing(lambda t: -g_phi(t), -s[ok], 0.0, 1.0, ftol=1e-14)
    return out.reshape(u.shape)


class AdditiveProductCopula(TransformedCopula):
    """``lambda^[-1](lambda(min) + chi(max))`` over the product copula."""

    family = "AdditiveProduct"

    def __init__(self, lam: Callable, chi: Callable, pair: GeneratorPair,
                 validation: ConditionCertificate | None, label: str = "additive"):
        super().__init__(Independence(), pair, validation)
        self.lam = lam
        self.chi = chi
        self.label = label

    def cdf_additive(self, u, v):
        """Direct evaluation from the additive generators."""
        u, v = np.broadcast_arrays(as_unit(u), as_unit(v))
        m, mx = np.minimum(u, v).ravel(), np.maximum(u, v).ravel()
        with np.errstate(divide="ignore"):
            s = self.lam(m) + self.chi(mx)
            lam0 = float(self.lam(np.array(0.0)))
        out = np.zeros_like(s)
        ok = s < lam0
        if np.any(ok):
            out[ok] = bisect_increasing(
                lambda t: -self._lam_safe(t), -s[ok], 0.0, 1.0, ftol=1e-14
            )
        return out.reshape(u.shape)

    def _lam_safe(self, t):
        with np.errstate(divide="ignore"):
            return np.asarray(self.lam(t), dtype=float)


def additive_product_copula(lam: Callable, chi: Callable, dlam: Callable | None = None,
                            dchi: Callable | None = None, mode: str | None = None,
                            n: int = 200, label: str = "additive") -> AdditiveProductCopula:
    """Product-base transform with ``phi = exp(-lam)``, ``psi = exp(-chi)``.

    Requires ``lam`` strictly decreasing with ``lam(1) = 0``, ``chi``
    nonincreasing with ``chi(1) = 0`` and ``chi - lam`` increasing.  With
    ``mode=None`` the theorem gate is used when ``exp(-lam)`` is concave and the
    direct grid gate otherwise.
    """
    t = np.linspace(1e-6, 1.0, 1001)
    with np.errstate(divide="ignore"):
        lt, ct = np.asarray(lam(t), float), np.asarray(chi(t), float)
    if abs(lt[-1]) > 1e-12 or abs(ct[-1]) > 1e-12:
        raise ValueError("additive generators must vanish at 1")
    if np.any(np.diff(lt) >= 0):
        raise ValueError("lambda must be strictly decreasing")
    if np.any(np.diff(ct) > 1e-12):
        raise ValueError("chi must be nonincreasing")
    if np.any(np.diff(ct - lt) < -1e-10):
        raise ValueError("chi - lambda must be increasing")
    phi = from_additive(lam, dlam, label)
    psi = from_additive(chi, dchi, "chi", strict=False)
    pair = GeneratorPair(phi, psi)
    if mode is None:
        mode = THEOREM_GATE if check_phi_membership(phi, concave=True).passed else DIRECT_GATE
    tf = build(Independence(), pair, mode, n)
    return AdditiveProductCopula(lam, chi, tf.pair, tf.validation, label)
