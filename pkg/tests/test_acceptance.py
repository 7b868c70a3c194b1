"""Acceptance matrix: one test per criterion, each reporting a PASS/FAIL line.

Lines are collected in ``RESULTS`` and printed by the terminal-summary hook in
``conftest.py``.
"""

import numpy as np
import pytest

from tfcopula import dependence as dep
from tfcopula import generators as gen
from tfcopula import suite
from tfcopula import transform as tr
from tfcopula.closed_forms import ca_beta_alpha_mass, cuadras_auge_mass
from tfcopula.core import check_copula, check_two_increasing
from tfcopula.families import FGM, Clayton, CuadrasAuge, FrechetLower, Gumbel, Independence
from tfcopula.sampling import sample

SEED = 1
RESULTS: dict[str, tuple[bool, str]] = {}


def record(name: str, ok: bool, detail: str) -> None:
    RESULTS[name] = (bool(ok), detail)
    assert ok, detail


def pair(phi, psi):
    return gen.GeneratorPair(phi, psi)


@pytest.fixture(scope="module")
def rank_table():
    return suite.rank_table(suite.Settings(seed=SEED))


def test_criterion_01_fgm_singular_mass():
    worst_q, worst_mc = 0.0, 0.0
    for theta in (0.0, 0.5, 1.0):
        tf = tr.build(FGM(theta), pair(gen.identity(), gen.power(0.5)))
        expected = (5 + theta) / 15
        worst_q = max(worst_q, abs(tr.singular_mass(tf).singular_mass - expected))
        worst_mc = max(worst_mc, abs(sample(tf, 200_000, SEED).diagonal_fraction - expected))
    record("1 singular mass TF-FGM", worst_q <= 1e-6 and worst_mc <= 0.005,
           f"quadrature error {worst_q:.2e} (tol 1e-6), MC error {worst_mc:.4f} (tol 0.005)")


def test_criterion_02_ca_singular_mass():
    worst, reduce_ok, gap_ok = 0.0, True, True
    for a in (0.25, 0.5, 0.75):
        for g in (0.0, a / 2, a):
            tf = tr.build(CuadrasAuge(a), pair(gen.power(a), gen.ca_map(a, g)))
            expected = 4 / (1 + a) - (1 - a - g) / (1 + a + g) - 2
            worst = max(worst, abs(tr.singular_mass(tf).singular_mass - expected))
            gap = ca_beta_alpha_mass(a, g) - cuadras_auge_mass(a)
            gap_ok &= gap >= -1e-15 and abs(gap - 2 * g / ((1 + a) * (1 + a + g))) <= 1e-14
            if g == 0.0:
                reduce_ok &= ca_beta_alpha_mass(a, g) == pytest.approx((1 - a) / (1 + a), abs=1e-15)
    record("2 singular mass TF-CA", worst <= 1e-6 and reduce_ok and gap_ok,
           f"quadrature error {worst:.2e} (tol 1e-6), gamma=0 reduction {reduce_ok}, excess >= 0 {gap_ok}")


def test_criterion_03_rank_table(rank_table):
    worst, where = 0.0, None
    for (name, key), (tau, rho, _) in rank_table.items():
        rt, rr = suite.REFERENCE_TABLE[name][key]
        d = max(abs(tau - rt), abs(rho - rr))
        if d > worst:
            worst, where = d, f"{name} ({key})"
    record("3 rank-correlation table", worst <= 0.03, f"largest deviation {worst:.4f} at {where} (tol 0.03)")


def test_criterion_04_tau_ordering(rank_table):
    bad = []
    for name in suite.STUDY_BASES:
        t = {k: rank_table[(name, k)][0] for k in "abcd"}
        if not min(t["a"], t["b"]) > max(t["c"], t["d"]):
            bad.append(name)
    record("4 tau ordering (a),(b) > (c),(d)", not bad, f"violations: {bad or 'none'}")


def test_criterion_05_tail_closed_forms():
    worst = 0.0
    for beta, gamma in ((1.0, 0.5), (0.8, 0.4), (0.5, 0.25)):
        a = tr.build(FGM(1.0), pair(gen.power(beta), gen.ca_map(beta, gamma)))
        b = tr.build(FGM(1.0), pair(gen.power(beta), gen.power(gamma)))
        worst = max(worst, abs(dep.lambda_numeric(a, dep.UPPER).lambda_U_numeric - gamma / beta),
                    abs(dep.lambda_numeric(b, dep.UPPER).lambda_U_numeric - (1 - gamma / beta)))
    for a0, theta in ((0.5, 0.0), (0.5, 1.0), (0.25, 0.5)):
        tf = tr.build(FGM(theta), pair(gen.identity(), gen.affine(a0)))
        worst = max(worst, abs(dep.lambda_numeric(tf, dep.LOWER).lambda_L_numeric - a0 * (1 + (1 - a0) * theta)))
    record("5 tail closed forms", worst <= 1e-3, f"largest error {worst:.2e} (tol 1e-3)")


def test_criterion_06_tail_consistency():
    half = pair(gen.power(0.5), gen.power(0.5))
    lam_u = dep.lambda_numeric(tr.build(Gumbel(3.0), half), dep.UPPER).lambda_U_numeric
    lam_l = dep.lambda_numeric(tr.build(Clayton(2.0), half), dep.LOWER).lambda_L_numeric
    target_u = 2 - (2 ** (1 / 3)) ** 2
    ok_u, ok_l = abs(lam_u - target_u) <= 1e-3, abs(lam_l - 0.5) <= 1e-3
    record("6 tail consistency", ok_u and ok_l,
           f"upper {lam_u:.5f} vs stated {target_u:.5f} ({'ok' if ok_u else 'MISMATCH'}); "
           f"lower {lam_l:.5f} vs 0.5 ({'ok' if ok_l else 'MISMATCH'})")


def test_criterion_07_validity_gates():
    configs = [(make(), gen.preset_pair(k)) for make in suite.STUDY_BASES.values() for k in "abcd"]
    configs += [(FGM(th), pair(gen.identity(), gen.power(0.5))) for th in (0.0, 0.5, 1.0)]
    configs += [(CuadrasAuge(0.5), pair(gen.power(0.5), gen.ca_map(0.5, g))) for g in (0.25, 0.5)]
    failing = 0
    for base, p in configs:
        checks = check_copula(tr.build(base, p), 200, 1e-10)
        failing += not all(r.passed for r in checks.values())
    bad = pair(gen.identity(), gen.power(2.0))
    try:
        tr.build(Independence(), bad)
        rejected = False
    except tr.ValidationError:
        rejected = True
    vol = check_two_increasing(tr.candidate(Independence(), bad), 200).worst_violation
    record("7 validity gates", failing == 0 and rejected and vol < 0,
           f"{len(configs) - failing}/{len(configs)} certified configs pass, (t, t^2) rejected {rejected}, "
           f"min volume {vol:.3e}")


def test_criterion_08_tp2():
    reports = [dep.tp2_check(tr.build(FGM(th), pair(gen.identity(), gen.power(0.5))), 100) for th in (0.0, 1.0)]
    reports += [dep.tp2_check(tr.build(CuadrasAuge(0.5), pair(gen.power(0.5), gen.ca_map(0.5, g))), 100)
                for g in (0.25, 0.5)]
    w = dep.tp2_check(FrechetLower(), 100)
    u1, u2, v1, v2 = w.worst_location
    record("8 TP2", all(r.passed for r in reports) and not w.passed,
           f"TF cases pass {sum(r.passed for r in reports)}/4; W counterexample "
           f"u=({u1:.3f},{u2:.3f}) v=({v1:.3f},{v2:.3f}) value {w.worst_violation:.4f}")


def test_criterion_09_concordance():
    p = gen.preset_pair("a")
    preserved = dep.concordance_compare(tr.build(FGM(0.2), p), tr.build(FGM(0.8), p)).passed
    base = dep.concordance_compare(FGM(0.2), FGM(0.8)).passed
    fwd = dep.compare_psi_order(Independence(), gen.identity(), gen.power(0.6), gen.power(0.4))
    rev = dep.compare_psi_order(Independence(), gen.identity(), gen.power(0.4), gen.power(0.6))
    ok = base and preserved and fwd.agree and rev.agree and fwd.grid.passed and not rev.grid.passed
    record("9 concordance order", ok,
           f"base order {base}, transformed order {preserved}, psi criterion agrees both ways {fwd.agree and rev.agree}")


def test_criterion_10_identities():
    t = np.linspace(0, 1, 200)
    u, v = np.meshgrid(t, t, indexing="ij")
    sup = 0.0
    for make in suite.STUDY_BASES.values():
        base = make()
        tf = tr.build(base, pair(gen.identity(), gen.identity()))
        sup = max(sup, float(np.max(np.abs(tf.cdf(u, v) - base.cdf(u, v)))))
    gap = 0.0
    g = np.linspace(0.01, 0.99, 40)
    gu, gv = np.meshgrid(g, g, indexing="ij")
    for make in suite.STUDY_BASES.values():
        for k in "abcd":
            tf = tr.build(make(), gen.preset_pair(k))
            gap = max(gap, float(np.max(np.abs(tr.archimedean_shortcut(tf, gu, gv) - tf.cdf(gu, gv)))))
    rng = np.random.Generator(np.random.Philox(key=SEED))
    same = 0
    for _ in range(50):
        n = int(rng.integers(2, 2001))
        x = np.round(rng.random((n, 2)), int(rng.integers(1, 4)))
        same += dep.kendall_tau(x) == dep.kendall_tau_bruteforce(x)
    record("10 identity and oracle properties", sup <= 1e-12 and gap <= 1e-10 and same == 50,
           f"identity sup-norm {sup:.1e}, shortcut gap {gap:.1e}, tau exact {same}/50")
