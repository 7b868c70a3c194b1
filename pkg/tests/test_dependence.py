import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from tfcopula import dependence as dep
from tfcopula import generators as gen
from tfcopula import transform as tr
from tfcopula.families import FGM, Clayton, CuadrasAuge, Frank, FrechetLower, FrechetUpper, Gumbel, Independence


def pair(phi, psi):
    return gen.GeneratorPair(phi, psi)


# --- numeric tail coefficients --------------------------------------------


@pytest.mark.parametrize(
    "copula, side, expected",
    [
        (FrechetUpper(), dep.UPPER, 1.0),
        (FGM(1.0), dep.UPPER, 0.0),
        (FGM(1.0), dep.LOWER, 0.0),
        (Clayton(2.0), dep.LOWER, 2**-0.5),
        (Gumbel(3.0), dep.UPPER, 2 - 2 ** (1 / 3)),
        (Independence(), dep.LOWER, 0.0),
    ],
)
def test_lambda_numeric_known(copula, side, expected):
    rep = dep.lambda_numeric(copula, side)
    value = rep.lambda_U_numeric if side == dep.UPPER else rep.lambda_L_numeric
    assert value == pytest.approx(expected, abs=1e-6)
    assert len(rep.raw_quotients) == len(dep.DEFAULT_EPS)


def test_lambda_numeric_rejects_bad_offsets():
    for eps in ([0.01], [0.01, 0.02], [0.5, 0.01], [0.01, -1e-3]):
        with pytest.raises(ValueError):
            dep.lambda_numeric(FGM(1.0), dep.UPPER, eps)
    with pytest.raises(ValueError):
        dep.lambda_numeric(FGM(1.0), "Middle")


def test_convergence_warning():
    slow = tr.build(Independence(), pair(gen.identity(), gen.identity()))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dep.lambda_numeric(slow, dep.UPPER)
    with pytest.warns(dep.TailConvergenceWarning):
        dep.lambda_numeric(CuadrasAuge(0.1), dep.LOWER)  # quotient u^0.1


def test_tail_report_serialises():
    rep = dep.tail_report(Clayton(2.0), closed=(0.0, 2**-0.5))
    d = rep.to_dict()
    assert d["lambda_L_numeric"] == pytest.approx(2**-0.5, abs=1e-6)
    assert d["lambda_L_closed"] == 2**-0.5 and "upper:" in d["extrapolation_note"]


@pytest.mark.parametrize("beta, gamma", [(1.0, 0.5), (0.8, 0.4), (0.5, 0.25), (0.9, 0.3)])
def test_fgm_tail_examples(beta, gamma):
    a = tr.build(FGM(1.0), pair(gen.power(beta), gen.ca_map(beta, gamma)))
    b = tr.build(FGM(1.0), pair(gen.power(beta), gen.power(gamma)))
    lam_a = dep.lambda_numeric(a, dep.UPPER).lambda_U_numeric
    lam_b = dep.lambda_numeric(b, dep.UPPER).lambda_U_numeric
    assert lam_a == pytest.approx(gamma / beta, abs=1e-3)
    assert lam_b == pytest.approx(1 - gamma / beta, abs=1e-3)
    closed_a = dep.lambda_transformed_closed(0.0, dep.TailCaseInputs(1.0, beta, 1 - gamma / beta, dep.UPPER_LAMU0))
    closed_b = dep.lambda_transformed_closed(0.0, dep.TailCaseInputs(1.0, beta, gamma / beta, dep.UPPER_LAMU0))
    assert closed_a == pytest.approx(gamma / beta) and closed_b == pytest.approx(1 - gamma / beta)


def test_closed_forms_by_case():
    assert dep.lambda_transformed_closed(0.0, dep.TailCaseInputs(1.0, 1.0, 1.0, dep.UPPER_LAMU0)) == 0.0
    assert dep.lambda_transformed_closed(0.5, dep.TailCaseInputs(0.5, 1.0, 1.0, dep.UPPER_B1)) == \
        pytest.approx(2 - 1.5**2)
    assert dep.lambda_transformed_closed(0.25, dep.TailCaseInputs(0.5, 1.0, 1.0, dep.LOWER_B1)) == \
        pytest.approx(0.0625)
    assert dep.lambda_transformed_closed(0.0, dep.TailCaseInputs(1.0, 1.0, 0.5, dep.LOWER_LAML0)) == 0.0


@pytest.mark.parametrize(
    "base_lambda, inputs",
    [
        (0.3, dep.TailCaseInputs(1.0, 1.0, 0.5, dep.UPPER_B1)),
        (0.3, dep.TailCaseInputs(1.0, 1.0, 0.5, dep.UPPER_LAMU0)),
        (0.3, dep.TailCaseInputs(1.0, 1.0, 0.5, dep.LOWER_LAML0)),
        (0.3, dep.TailCaseInputs(1.0, 1.0, 0.0, dep.UNSUPPORTED)),
    ],
)
def test_case_mismatch(base_lambda, inputs):
    with pytest.raises(dep.CaseMismatchError):
        dep.lambda_transformed_closed(base_lambda, inputs)


def test_tail_inputs_validation():
    with pytest.raises(ValueError):
        dep.TailCaseInputs(1.0, 1.0, 1.0, "Sideways")
    with pytest.raises(ValueError):
        dep.TailCaseInputs(0.0, 1.0, 1.0, dep.UPPER_B1)
    with pytest.raises(dep.CaseMismatchError):
        dep.TailCaseInputs(1.0, 1.0, 1.5, dep.UPPER_LAMU0)
    with pytest.raises(dep.CaseMismatchError):
        dep.TailCaseInputs(1.0, 1.0, 0.0, dep.LOWER_LAML0)


def test_estimate_tail_inputs_examples():
    est = dep.estimate_tail_inputs(pair(gen.power(0.5), gen.power(0.5)), dep.LOWER)
    assert est.alpha_exp == pytest.approx(0.5, abs=1e-9) and est.a == pytest.approx(1.0, abs=1e-9)
    assert est.b == 1.0 and est.case_tag == dep.LOWER_B1

    est = dep.estimate_tail_inputs(pair(gen.identity(), gen.affine(0.5)), dep.LOWER)
    assert est.b == 0.0 and est.case_tag == dep.UNSUPPORTED

    for side in (dep.UPPER, dep.LOWER):
        est = dep.estimate_tail_inputs(gen.preset_pair("c"), side)
        assert est.b == 1.0

    est = dep.estimate_tail_inputs(pair(gen.power(0.8), gen.power(0.4)), dep.UPPER)
    assert est.alpha_exp == pytest.approx(1.0, abs=1e-5)
    assert est.b == pytest.approx(0.5, abs=1e-5) and est.case_tag == dep.UPPER_LAMU0
    with pytest.raises(ValueError):
        dep.estimate_tail_inputs(gen.preset_pair("a"), "Middle")


@pytest.mark.parametrize("name, base, side", [("Gumbel", Gumbel(3.0), dep.UPPER), ("Clayton", Clayton(2.0), dep.LOWER)])
def test_closed_and_numeric_tail_agree(name, base, side):
    half = pair(gen.power(0.5), gen.power(0.5))
    tf = tr.build(base, half)
    key = "lambda_U_numeric" if side == dep.UPPER else "lambda_L_numeric"
    closed = dep.lambda_transformed_closed(getattr(dep.lambda_numeric(base, side), key),
                                           dep.estimate_tail_inputs(half, side))
    assert getattr(dep.lambda_numeric(tf, side), key) == pytest.approx(closed, abs=1e-3)


def test_gumbel_half_power_upper_tail_value():
    tf = tr.build(Gumbel(3.0), pair(gen.power(0.5), gen.power(0.5)))
    assert dep.lambda_numeric(tf, dep.UPPER).lambda_U_numeric == pytest.approx(2 - 2 ** (1 / 3), abs=1e-6)


def test_clayton_half_power_lower_tail_value():
    tf = tr.build(Clayton(2.0), pair(gen.power(0.5), gen.power(0.5)))
    assert dep.lambda_numeric(tf, dep.LOWER).lambda_L_numeric == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("alpha0, theta, expected", [(0.5, 1.0, 0.75), (1.0, 0.3, 1.0), (0.5, 0.0, 0.5), (0.25, 0.5, 0.34375)])
def test_lambda_fgm_affine_lower(alpha0, theta, expected):
    assert dep.lambda_fgm_affine_lower(alpha0, theta) == pytest.approx(expected)
    if alpha0 < 1:
        tf = tr.build(FGM(theta), pair(gen.identity(), gen.affine(alpha0)))
        assert dep.lambda_numeric(tf, dep.LOWER).lambda_L_numeric == pytest.approx(expected, abs=1e-3)


def test_lambda_fgm_affine_lower_domain():
    with pytest.raises(ValueError):
        dep.lambda_fgm_affine_lower(0.0, 0.5)
    with pytest.raises(ValueError):
        dep.lambda_fgm_affine_lower(0.5, 1.5)


def test_additive_closed_examples():
    assert dep.lambda_additive_closed(dep.UPPER, 1.0, 0.3) == pytest.approx(0.7)
    assert dep.lambda_additive_closed(dep.UPPER, 1.0, 1.0) == pytest.approx(0.0)
    assert dep.lambda_additive_closed(dep.UPPER, 0.5, 1.0) == pytest.approx(-2.0)
    assert dep.lambda_additive_closed(dep.LOWER, 1.0, -0.7) == 0.0
    with pytest.raises(dep.CaseMismatchError):
        dep.lambda_additive_closed(dep.UPPER, 1.0, 2.0)
    with pytest.raises(dep.CaseMismatchError):
        dep.lambda_additive_closed(dep.LOWER, 1.0, 0.5)
    with pytest.raises(ValueError):
        dep.lambda_additive_closed(dep.UPPER, 0.0, 0.5)


def test_additive_cuadras_auge_tails_match_numeric():
    a0 = 0.3
    c = tr.additive_product_copula(lambda t: -np.log(t), lambda t: -a0 * np.log(t))
    assert dep.lambda_numeric(c, dep.UPPER).lambda_U_numeric == pytest.approx(
        dep.lambda_additive_closed(dep.UPPER, 1.0, a0), abs=1e-3)
    # C(u,u)/u = u^a0 decays too slowly for a0 = 0.3 and is flagged as such
    with pytest.warns(dep.TailConvergenceWarning):
        dep.lambda_numeric(c, dep.LOWER)
    steep = tr.additive_product_copula(lambda t: -np.log(t), lambda t: -0.8 * np.log(t))
    assert dep.lambda_numeric(steep, dep.LOWER).lambda_L_numeric == pytest.approx(
        dep.lambda_additive_closed(dep.LOWER, 1.0, -np.inf), abs=1e-3)


def test_additive_linear_lower_tail_zero():
    c = tr.additive_product_copula(lambda t: 1 - t, lambda t: 0.5 * (1 - t), n=40)
    assert dep.lambda_numeric(c, dep.LOWER).lambda_L_numeric == pytest.approx(0.0, abs=1e-3)


# --- rank correlation ------------------------------------------------------


samples = st.integers(2, 300).flatmap(
    lambda n: st.tuples(st.integers(0, 2**32 - 1), st.just(n), st.integers(0, 3))
)


@given(samples)
def test_tau_merge_matches_bruteforce(args):
    seed, n, digits = args
    x = np.random.default_rng(seed).random((n, 2))
    if digits:
        x = np.round(x, digits)
    if np.all(x == x[0]):
        return
    assert dep.kendall_tau(x) == dep.kendall_tau_bruteforce(x)


def test_tau_and_rho_match_scipy_without_ties():
    x = np.random.default_rng(3).random((500, 2))
    x[:, 1] += x[:, 0]
    assert dep.kendall_tau(x) == pytest.approx(stats.kendalltau(x[:, 0], x[:, 1]).statistic, abs=1e-12)
    assert dep.spearman_rho(x) == pytest.approx(stats.spearmanr(x[:, 0], x[:, 1]).statistic, abs=1e-12)


def test_rank_measures_on_monotone_samples():
    t = np.linspace(0, 1, 100)
    assert dep.kendall_tau(np.column_stack([t, t])) == 1.0
    assert dep.spearman_rho(np.column_stack([t, t**3])) == pytest.approx(1.0)
    assert dep.kendall_tau(np.column_stack([t, 1 - t])) == -1.0


def test_degenerate_samples():
    x = np.ones((10, 2))
    with pytest.raises(dep.DegenerateSampleError):
        dep.kendall_tau(x)
    with pytest.raises(dep.DegenerateSampleError):
        dep.kendall_tau_bruteforce(x)
    with pytest.raises(dep.DegenerateSampleError):
        dep.spearman_rho(np.column_stack([np.arange(10.0), np.ones(10)]))
    with pytest.raises(ValueError):
        dep.kendall_tau(np.ones((1, 2)))
    with pytest.raises(ValueError):
        dep.kendall_tau(np.ones((4, 3)))


def test_standard_errors():
    x = np.random.default_rng(5).random((4000, 2))
    se = dep.kendall_tau_se(x)
    assert se == pytest.approx(2 / 3 / np.sqrt(4000), rel=0.1)  # independence: Var = 4/(9n)
    assert dep.spearman_rho_se(0.0, 103) == pytest.approx(0.1)
    assert np.isnan(dep.spearman_rho_se(0.5, 3))


# --- TP2 and concordance -----------------------------------------------------


def test_tp2_examples():
    assert dep.tp2_check(tr.build(FGM(1.0), pair(gen.identity(), gen.power(0.5))), 40).passed
    assert dep.tp2_check(tr.build(CuadrasAuge(0.5), pair(gen.power(0.5), gen.ca_map(0.5, 0.25))), 40).passed
    bad = dep.tp2_check(FrechetLower(), 40)
    assert not bad.passed and bad.worst_violation < -0.2
    u1, u2, v1, v2 = bad.worst_location
    w = FrechetLower()
    lhs = w.cdf(u1, v1) * w.cdf(u2, v2) - w.cdf(u1, v2) * w.cdf(u2, v1)
    assert lhs == pytest.approx(bad.worst_violation, abs=1e-15)


def test_tp2_random_rectangles_for_large_grids():
    rep = dep.tp2_check(FrechetLower(), 201, rectangles=20000, seed=1)
    assert not rep.passed and rep.details["rectangles"] == 20000
    again = dep.tp2_check(FrechetLower(), 201, rectangles=20000, seed=1)
    assert again.worst_violation == rep.worst_violation


def test_concordance_examples():
    assert dep.concordance_compare(FGM(0.2), FGM(0.8)).passed
    assert not dep.concordance_compare(FGM(0.8), FGM(0.2)).passed
    p = gen.preset_pair("a")
    assert dep.concordance_compare(tr.build(FGM(0.2), p), tr.build(FGM(0.8), p)).passed


def test_psi_order_criterion_matches_grid_order():
    fwd = dep.compare_psi_order(Independence(), gen.identity(), gen.power(0.6), gen.power(0.4), 100)
    rev = dep.compare_psi_order(Independence(), gen.identity(), gen.power(0.4), gen.power(0.6), 100)
    assert fwd.grid.passed and fwd.criterion.passed and fwd.agree
    assert not rev.grid.passed and not rev.criterion.passed and rev.agree


def test_phi_order_criterion_matches_grid_order():
    psi = gen.power(0.5)
    fwd = dep.compare_phi_order(Clayton(2.0), gen.power(0.8), gen.power(0.6), psi, 80)
    rev = dep.compare_phi_order(Clayton(2.0), gen.power(0.6), gen.power(0.8), psi, 80)
    assert fwd.agree and rev.agree
    assert fwd.grid.passed != rev.grid.passed


# --- population measures -----------------------------------------------------


POPULATION = {
    ("Clayton", "a"): (0.62987, 0.77774), ("Clayton", "b"): (0.52033, 0.68235),
    ("Clayton", "c"): (1 / 3, 0.47842), ("Clayton", "d"): (0.5, 0.68223),
    ("Gumbel", "a"): (0.86918, 0.95715), ("Gumbel", "b"): (0.80220, 0.92882),
    ("Gumbel", "c"): (2 / 3, 0.84883), ("Gumbel", "d"): (2 / 3, 0.84883),
    ("Frank", "a"): (0.58023, 0.73663), ("Frank", "b"): (0.48480, 0.64992),
    ("Frank", "c"): (0.32124, 0.46652), ("Frank", "d"): (0.38815, 0.55722),
}
BASES = {"Clayton": lambda: Clayton(2.0), "Gumbel": lambda: Gumbel(3.0), "Frank": lambda: Frank(4.0)}


@pytest.mark.parametrize("name, key", list(POPULATION))
def test_population_measures(name, key):
    tf = tr.build(BASES[name](), gen.preset_pair(key))
    tau, rho = POPULATION[(name, key)]
    assert dep.kendall_tau_population(tf) == pytest.approx(tau, abs=2e-5)
    assert dep.spearman_rho_population(tf) == pytest.approx(rho, abs=2e-5)


def test_population_measures_of_known_copulas():
    assert dep.kendall_tau_population(Clayton(2.0)) == pytest.approx(0.5, abs=1e-8)
    assert dep.spearman_rho_population(Independence()) == pytest.approx(0.0, abs=1e-12)
    a = 0.5  # Cuadras-Auge min * max^a: tau = (1-a)/(1+a), rho = 3(1-a)/(3+a)
    assert dep.kendall_tau_population(CuadrasAuge(a)) == pytest.approx((1 - a) / (1 + a), abs=1e-6)
    assert dep.spearman_rho_population(CuadrasAuge(a)) == pytest.approx(3 * (1 - a) / (3 + a), abs=1e-8)
