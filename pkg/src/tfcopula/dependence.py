"""Tail dependence, rank correlation, TP2 and concordance order.

Tail coefficients come from the diagonal limits

    lambda_U = 2 - lim_{u -> 1-} (1 - C(u,u)) / (1 - u)
    lambda_L = lim_{u -> 0+} C(u,u) / u

evaluated along a geometric sequence of offsets and Richardson-extrapolated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from tfcopula.core import Copula, GridCheckReport, unit_grid
from tfcopula.generators import GeneratorPair, MonotoneMap
from tfcopula.numerics import log_log_slope, richardson

UPPER = "Upper"
LOWER = "Lower"
DEFAULT_EPS = tuple(10.0 ** -k for k in range(2, 8))
CONVERGENCE_TOL = 1e-3
CASE_TOL = 1e-6

UPPER_B1 = "Upper_b1"
UPPER_LAMU0 = "Upper_lamU0"
LOWER_B1 = "Lower_b1"
LOWER_LAML0 = "Lower_lamL0"
UNSUPPORTED = "Unsupported"
CASE_TAGS = (UPPER_B1, UPPER_LAMU0, LOWER_B1, LOWER_LAML0, UNSUPPORTED)


class TailConvergenceWarning(RuntimeWarning):
    """Successive extrapolated tail estimates disagree."""


class CaseMismatchError(ValueError):
    """The tail-case hypotheses do not match the supplied inputs."""


class DegenerateSampleError(ValueError):
    """Rank correlation undefined (a margin is constant)."""


@dataclass(frozen=True)
class TailReport:
    lambda_U_numeric: float | None = None
    lambda_L_numeric: float | None = None
    lambda_U_closed: float | None = None
    lambda_L_closed: float | None = None
    eps_sequence: tuple = DEFAULT_EPS
    raw_quotients: tuple = ()
    extrapolated: tuple = ()
    extrapolation_note: str = ""

    def to_dict(self) -> dict:
        return {
            "lambda_U_numeric": self.lambda_U_numeric,
            "lambda_L_numeric": self.lambda_L_numeric,
            "lambda_U_closed": self.lambda_U_closed,
            "lambda_L_closed": self.lambda_L_closed,
            "eps_sequence": list(self.eps_sequence),
            "raw_quotients": list(self.raw_quotients),
            "extrapolated": list(self.extrapolated),
            "extrapolation_note": self.extrapolation_note,
        }


@dataclass(frozen=True)
class TailCaseInputs:
    alpha_exp: float
    a: float
    b: float
    case_tag: str

    def __post_init__(self):
        if self.case_tag not in CASE_TAGS:
            raise ValueError(f"unknown case tag {self.case_tag!r}")
        if not self.alpha_exp > 0:
            raise ValueError("alpha_exp must be positive")
        if self.case_tag == UPPER_LAMU0 and not -CASE_TOL <= self.b <= 1 + CASE_TOL:
            raise CaseMismatchError("Upper_lamU0 needs b in [0, 1]")
        if self.case_tag == LOWER_LAML0 and not 0 < self.b <= 1 + CASE_TOL:
            raise CaseMismatchError("Lower_lamL0 needs b in (0, 1]")


def _check_eps(eps_list) -> np.ndarray:
    eps = np.asarray(eps_list, dtype=float)
    if eps.ndim != 1 or eps.size < 2:
        raise ValueError("need at least two offsets")
    if np.any(eps <= 0) or np.any(eps > 0.1) or np.any(np.diff(eps) >= 0):
        raise ValueError("offsets must be decreasing and lie in (0, 0.1]")
    return eps


def _extrapolate(eps: np.ndarray, q: np.ndarray) -> np.ndarray:
    ratios = eps[:-1] / eps[1:]
    if np.allclose(ratios, ratios[0], rtol=1e-9):
        return richardson(q, float(ratios[0]), order=1)
    # non-geometric sequence: linear extrapolation in eps pairwise
    return (eps[:-1] * q[1:] - eps[1:] * q[:-1]) / (eps[:-1] - eps[1:])


def _tail_quotients(copula: Copula, side: str, eps: np.ndarray) -> np.ndarray:
    if side == UPPER:
        u = 1.0 - eps
        return (1.0 - np.asarray(copula.cdf(u, u), dtype=float)) / eps
    if side == LOWER:
        return np.asarray(copula.cdf(eps, eps), dtype=float) / eps
    raise ValueError(f"side must be {UPPER!r} or {LOWER!r}")


def lambda_numeric(copula: Copula, side: str, eps_list=DEFAULT_EPS) -> TailReport:
    """Numeric tail coefficient on one side.

    The difference quotient is evaluated at each offset and extrapolated to
    zero; the last extrapolated value is reported.  Emits
    :class:`TailConvergenceWarning` when the last two extrapolated values
    differ by more than ``1e-3``.
    """
    eps = _check_eps(eps_list)
    q = _tail_quotients(copula, side, eps)
    lam_raw = 2.0 - q if side == UPPER else q
    ext = _extrapolate(eps, lam_raw)
    value = float(np.clip(ext[-1], 0.0, 1.0))
    spread = float(abs(ext[-1] - ext[-2])) if ext.size > 1 else 0.0
    note = f"first-order Richardson over {eps.size} offsets; last step change {spread:.2e}"
    if spread > CONVERGENCE_TOL:
        warnings.warn(f"tail estimate not converged ({spread:.2e})", TailConvergenceWarning, stacklevel=2)
        note += " (not converged)"
    kw = {"lambda_U_numeric": value} if side == UPPER else {"lambda_L_numeric": value}
    return TailReport(eps_sequence=tuple(eps.tolist()), raw_quotients=tuple(lam_raw.tolist()),
                      extrapolated=tuple(ext.tolist()), extrapolation_note=note, **kw)


def tail_report(copula: Copula, eps_list=DEFAULT_EPS, closed: tuple | None = None) -> TailReport:
    """Both numeric tail coefficients, with optional closed values ``(lam_U, lam_L)``."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        up = lambda_numeric(copula, UPPER, eps_list)
        lo = lambda_numeric(copula, LOWER, eps_list)
    note = f"upper: {up.extrapolation_note}; lower: {lo.extrapolation_note}"
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    cu, cl = closed if closed is not None else (None, None)
    return TailReport(up.lambda_U_numeric, lo.lambda_L_numeric, cu, cl,
                      up.eps_sequence, (), (), note)


def lambda_transformed_closed(base_lambda: float, inputs: TailCaseInputs) -> float:
    """Closed-form tail coefficient of a transformed copula.

    ``Upper_b1``: ``2 - (2 - lambda_U(C))**(1/alpha)``;
    ``Upper_lamU0``: ``2 - (1 + b)**(1/alpha)``;
    ``Lower_b1``: ``lambda_L(C)**(1/alpha)``;
    ``Lower_lamL0``: 0.
    """
    tag, al, b = inputs.case_tag, inputs.alpha_exp, inputs.b
    if tag == UNSUPPORTED:
        raise CaseMismatchError("unsupported tail case: no closed form")
    if tag in (UPPER_B1, LOWER_B1) and abs(b - 1.0) > CASE_TOL:
        raise CaseMismatchError(f"{tag} needs b = 1, got {b}")
    if tag in (UPPER_LAMU0, LOWER_LAML0) and abs(base_lambda) > CASE_TOL:
        raise CaseMismatchError(f"{tag} needs a base coefficient of 0, got {base_lambda}")
    if tag == UPPER_B1:
        return 2.0 - (2.0 - base_lambda) ** (1.0 / al)
    if tag == UPPER_LAMU0:
        return 2.0 - (1.0 + min(max(b, 0.0), 1.0)) ** (1.0 / al)
    if tag == LOWER_B1:
        return base_lambda ** (1.0 / al)
    return 0.0


def estimate_tail_inputs(pair: GeneratorPair, side: str, eps_list=DEFAULT_EPS,
                         case_tag: str | None = None) -> TailCaseInputs:
    """Estimate ``alpha``, ``a`` and ``b`` of the tail hypotheses numerically.

    Upper side: ``1 - phi(1 - t) ~ a t**alpha`` and
    ``b = lim (1 - psi) / (1 - phi)``.  Lower side: ``phi(t) ~ a t**alpha`` and
    ``b = lim phi / psi``.  The exponent is the log-log slope over the last
    three offsets.  Without ``case_tag`` the ``b = 1`` case is chosen when
    ``|b - 1| <= 1e-6`` and the zero-base case otherwise; a lower-side ``b = 0``
    is tagged ``Unsupported``.
    """
    eps = _check_eps(eps_list)
    phi, psi = pair.phi, pair.psi
    if side == UPPER:
        t = 1.0 - eps
        y = 1.0 - np.asarray(phi(t), dtype=float)
        ratio = (1.0 - np.asarray(psi(t), dtype=float)) / y
    elif side == LOWER:
        y = np.asarray(phi(eps), dtype=float)
        ratio = y / np.asarray(psi(eps), dtype=float)
    else:
        raise ValueError(f"side must be {UPPER!r} or {LOWER!r}")
    slope, intercept = log_log_slope(eps[-3:], y[-3:])
    if eps.size >= 6:
        prev, _ = log_log_slope(eps[-6:-3], y[-6:-3])
        if abs(prev - slope) > 1e-2:
            warnings.warn(f"tail exponent slope unstable ({prev:.4f} vs {slope:.4f})",
                          TailConvergenceWarning, stacklevel=2)
    b = float(_extrapolate(eps, ratio)[-1])
    if abs(b) < 1e-9:
        b = 0.0
    if abs(b - 1.0) <= CASE_TOL:
        b = 1.0
    if case_tag is None:
        if side == UPPER:
            case_tag = UPPER_B1 if b == 1.0 else UPPER_LAMU0
        else:
            case_tag = LOWER_B1 if b == 1.0 else (LOWER_LAML0 if b > 0 else UNSUPPORTED)
    return TailCaseInputs(slope, float(np.exp(intercept)), b, case_tag)


def lambda_fgm_affine_lower(alpha0: float, theta: float) -> float:
    """Lower tail of FGM(theta) transformed by ``phi = t``, ``psi = (1-a)t + a``."""
    if not 0.0 < alpha0 <= 1.0 or not 0.0 <= theta <= 1.0:
        raise ValueError("need alpha0 in (0, 1] and theta in [0, 1]")
    return alpha0 * (1.0 + (1.0 - alpha0) * theta)


def lambda_additive_closed(side: str, alpha: float, b: float) -> float:
    """Tail coefficient of ``lam^[-1](lam(min) + chi(max))`` over the product copula.

    Upper side needs ``b = lim (1 - exp(-chi)) / (1 - exp(-lam))`` in ``[0, 1]``
    and returns ``2 - (1 + b)**(1/alpha)``.  Lower side needs
    ``b = lim (chi - lam)`` in ``(-inf, 0]`` and returns 0.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if side == UPPER:
        if not -CASE_TOL <= b <= 1.0 + CASE_TOL:
            raise CaseMismatchError("upper case needs b in [0, 1]")
        return 2.0 - (1.0 + b) ** (1.0 / alpha)
    if side == LOWER:
        if b > CASE_TOL:
            raise CaseMismatchError("lower case needs b <= 0")
        return 0.0
    raise ValueError(f"side must be {UPPER!r} or {LOWER!r}")


# rank correlation

def _as_xy(sample) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(sample, "pairs"):
        sample = sample.pairs
    arr = np.asarray(sample, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an (n, 2) array of pairs")
    if arr.shape[0] < 2:
        raise ValueError("need at least two pairs")
    return arr[:, 0], arr[:, 1]


def _tie_pairs(*keys) -> int:
    """Number of index pairs tied in all of ``keys`` jointly."""
    _, counts = np.unique(np.column_stack(keys), axis=0, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def _count_inversions(y: np.ndarray) -> int:
    """Pairs ``i < j`` with ``y[i] > y[j]``, by bottom-up merge counting.

    Each level merges sorted halves of width ``w``; for every element of a
    right half the number of strictly larger left-half elements is found by
    binary search, so the whole count is vectorized per level.
    """
    n = y.size
    r = rankdata(y, method="dense").astype(np.int64)
    pos = np.arange(n)
    big = np.int64(n + 2)
    total = 0
    w = 1
    while w < n:
        block = pos // (2 * w)
        left = (pos % (2 * w)) < w
        lkeys = np.sort(block[left] * big + r[left])
        rb, rr = block[~left], r[~left]
        upto = np.searchsorted(lkeys, rb * big + rr, side="right")
        end = np.searchsorted(lkeys, (rb + 1) * big, side="left")
        total += int(np.sum(end - upto))
        w *= 2
    return total


def _concordance_numerator(x: np.ndarray, y: np.ndarray) -> int:
    """``#concordant - #discordant`` (ties contribute 0), exact integer."""
    n = x.size
    order = np.lexsort((y, x))
    ys = y[order]
    n0 = n * (n - 1) // 2
    n1 = _tie_pairs(x)
    n2 = _tie_pairs(y)
    n3 = _tie_pairs(x, y)
    discordant = _count_inversions(ys)
    # pairs tied in x are sorted by y inside the lexsort, so they add no inversions
    return n0 - n1 - n2 + n3 - 2 * discordant


def kendall_tau(sample) -> float:
    """Kendall's tau-a: ``(concordant - discordant) / (n (n - 1) / 2)``."""
    x, y = _as_xy(sample)
    if np.all(x == x[0]) and np.all(y == y[0]):
        raise DegenerateSampleError("all pairs are equal")
    n = x.size
    return _concordance_numerator(x, y) / (n * (n - 1) / 2)


def kendall_tau_bruteforce(sample) -> float:
    """Quadratic-time tau-a, for cross-checking on small samples."""
    x, y = _as_xy(sample)
    if np.all(x == x[0]) and np.all(y == y[0]):
        raise DegenerateSampleError("all pairs are equal")
    n = x.size
    s = np.sign(x[:, None] - x[None, :]) * np.sign(y[:, None] - y[None, :])
    num = int(np.sum(np.triu(s, 1)))
    return num / (n * (n - 1) / 2)


def spearman_rho(sample) -> float:
    """Pearson correlation of midranks."""
    x, y = _as_xy(sample)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateSampleError("a margin is constant")
    rx, ry = rankdata(x), rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def kendall_tau_se(sample, max_pairs: int = 2000) -> float:
    """Asymptotic standard error of tau-a from its U-statistic projection.

    ``Var(tau) ~ 4 Var(c_i) / n`` with ``c_i`` the average concordance sign of
    pair ``i``; ``c_i`` is computed against the first ``max_pairs`` pairs.
    """
    x, y = _as_xy(sample)
    n = x.size
    m = min(n, max_pairs)
    xs, ys = x[:m], y[:m]
    s = np.sign(xs[:, None] - xs[None, :]) * np.sign(ys[:, None] - ys[None, :])
    c = s.sum(axis=1) / (m - 1)
    return float(2.0 * np.sqrt(np.var(c, ddof=1) / n))


def spearman_rho_se(rho: float, n: int) -> float:
    """Delta-method standard error through Fisher's z with the ``1 + rho^2/2`` factor."""
    if n <= 3:
        return float("nan")
    return float((1.0 - rho * rho) * np.sqrt((1.0 + rho * rho / 2.0) / (n - 3)))


# TP2 and concordance

TP2_TOL = 1e-12
TP2_RANDOM_RECTANGLES = 1_000_000


def _tp2_worst_exhaustive(a: np.ndarray) -> tuple[float, tuple[int, int, int, int]]:
    n = a.shape[0]
    worst, where = np.inf, (0, 0, 0, 0)
    iu, ju = np.triu_indices(n, 1)
    for i1 in range(n - 1):
        r1 = a[i1]
        rest = a[i1 + 1:]
        # d[k, j1, j2] = A[i1,j1] A[i2,j2] - A[i1,j2] A[i2,j1] over j1 < j2
        d = r1[iu][None, :] * rest[:, ju] - r1[ju][None, :] * rest[:, iu]
        k = int(np.argmin(d))
        kk, p = divmod(k, d.shape[1])
        if d[kk, p] < worst:
            worst = float(d[kk, p])
            where = (i1, i1 + 1 + kk, int(iu[p]), int(ju[p]))
    return worst, where


def tp2_check(copula: Copula, n: int = 50, tol: float = TP2_TOL, seed: int = 0,
              rectangles: int = TP2_RANDOM_RECTANGLES) -> GridCheckReport:
    """``C(u1,v1) C(u2,v2) >= C(u1,v2) C(u2,v1)`` for ordered grid rectangles.

    All rectangles of the ``n x n`` grid are checked when ``n <= 100``;
    otherwise ``rectangles`` random ones.  Products involving zeros are
    compared as they stand.  ``worst_location`` is ``(u1, u2, v1, v2)``.
    """
    t = unit_grid(n)
    a = np.asarray(copula.cdf(t[:, None], t[None, :]), dtype=float)
    if n <= 100:
        worst, (i1, i2, j1, j2) = _tp2_worst_exhaustive(a)
        checked = (n * (n - 1) // 2) ** 2
    else:
        rng = np.random.Generator(np.random.Philox(key=seed))
        i = np.sort(rng.integers(0, n, size=(rectangles, 2)), axis=1)
        j = np.sort(rng.integers(0, n, size=(rectangles, 2)), axis=1)
        d = a[i[:, 0], j[:, 0]] * a[i[:, 1], j[:, 1]] - a[i[:, 0], j[:, 1]] * a[i[:, 1], j[:, 0]]
        k = int(np.argmin(d))
        worst = float(d[k])
        i1, i2, j1, j2 = int(i[k, 0]), int(i[k, 1]), int(j[k, 0]), int(j[k, 1])
        checked = rectangles
    return GridCheckReport("tp2", n, worst, (t[i1], t[i2], t[j1], t[j2]), worst >= -tol, tol,
                           {"rectangles": checked})


def concordance_compare(c: Copula, d: Copula, n: int = 200, tol: float = 1e-12) -> GridCheckReport:
    """Whether ``C <= D`` pointwise on the grid; ``worst_violation = min(D - C)``."""
    t = unit_grid(n)
    diff = (np.asarray(d.cdf(t[:, None], t[None, :]), dtype=float)
            - np.asarray(c.cdf(t[:, None], t[None, :]), dtype=float))
    i, j = np.unravel_index(np.argmin(diff), diff.shape)
    worst = float(diff[i, j])
    return GridCheckReport("concordance", n, worst, (t[i], t[j]), worst >= -tol, tol)


@dataclass(frozen=True)
class OrderCriterionResult:
    grid: GridCheckReport
    criterion: GridCheckReport
    details: dict = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        return self.grid.passed == self.criterion.passed


def phi_order_criterion(base: Copula, phi1: MonotoneMap, phi2: MonotoneMap, n: int = 200,
                        tol: float = 1e-12) -> GridCheckReport:
    """``C(f(s), t) <= f(C(s, t))`` on ``0 <= s <= t <= 1`` with ``f = phi1 o phi2^[-1]``."""
    g = unit_grid(n)
    iu, ju = np.triu_indices(n)
    s, t = g[iu], g[ju]
    f = lambda x: np.asarray(phi1(phi2.pseudo_inverse(x)), dtype=float)  # noqa: E731
    margin = f(np.asarray(base.cdf(s, t))) - np.asarray(base.cdf(f(s), t))
    k = int(np.argmin(margin))
    worst = float(margin[k])
    return GridCheckReport("phi_order_criterion", n, worst, (s[k], t[k]), worst >= -tol, tol)


def compare_phi_order(base: Copula, phi1: MonotoneMap, phi2: MonotoneMap, psi: MonotoneMap,
                      n: int = 200) -> OrderCriterionResult:
    """Grid order of the two transforms sharing ``psi`` next to the generator criterion."""
    from tfcopula.transform import build

    c1 = build(base, GeneratorPair(phi1, psi), n=n)
    c2 = build(base, GeneratorPair(phi2, psi), n=n)
    return OrderCriterionResult(concordance_compare(c1, c2, n), phi_order_criterion(base, phi1, phi2, n))


def psi_order_criterion(psi1: MonotoneMap, psi2: MonotoneMap, n: int = 1001) -> GridCheckReport:
    """``psi1 <= psi2`` pointwise on a grid."""
    t = unit_grid(n)
    d = np.asarray(psi2(t)) - np.asarray(psi1(t))
    k = int(np.argmin(d))
    return GridCheckReport("psi_order_criterion", n, float(d[k]), (t[k],), d[k] >= -1e-12, 1e-12)


def compare_psi_order(base: Copula, phi: MonotoneMap, psi1: MonotoneMap, psi2: MonotoneMap,
                      n: int = 200) -> OrderCriterionResult:
    """Grid order of the two transforms sharing ``phi`` next to ``psi1 <= psi2``."""
    from tfcopula.transform import build

    c1 = build(base, GeneratorPair(phi, psi1), n=n)
    c2 = build(base, GeneratorPair(phi, psi2), n=n)
    return OrderCriterionResult(concordance_compare(c1, c2, n), psi_order_criterion(psi1, psi2))


# population measures by product Gauss-Legendre on the two triangles

def _triangle_rule(order: int = 200, panels: int = 40):
    x, w = np.polynomial.legendre.leggauss(order)
    s, ws = (x + 1.0) / 2.0, w / 2.0
    edges = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, panels)])
    for a, b in zip(edges[:-1], edges[1:]):
        v = (b - a) / 2.0 * x + (a + b) / 2.0
        wv = (b - a) / 2.0 * w
        # inner variable u = v * s on [0, v]
        yield v[:, None] * s[None, :], np.broadcast_to(v[:, None], (v.size, s.size)), \
            wv[:, None] * v[:, None] * ws[None, :]


def spearman_rho_population(copula: Copula, order: int = 200) -> float:
    """``12 * int C - 3``, integrating each side of the diagonal separately."""
    tot = 0.0
    for u, v, w in _triangle_rule(order):
        tot += np.sum(w * (np.asarray(copula.cdf(u, v)) + np.asarray(copula.cdf(v, u))))
    return float(12.0 * tot - 3.0)


def kendall_tau_population(copula: Copula, order: int = 200) -> float:
    """``1 - 4 * int C_u C_v``; valid with a singular diagonal part as well."""
    tot = 0.0
    for u, v, w in _triangle_rule(order):
        for a, b in ((u, v), (v, u)):
            tot += np.sum(w * np.asarray(copula.partial_u(a, b)) * np.asarray(copula.partial_v(a, b)))
    return float(1.0 - 4.0 * tot)
