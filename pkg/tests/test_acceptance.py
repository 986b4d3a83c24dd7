"""Acceptance gate: one PASS/FAIL line per criterion.

Lines are printed and also collected for the terminal summary, so they
appear in the test log even when output capture is on.
"""

import io
import json
import time

import numpy as np

from capalloc import distortions as D
from capalloc.allocations import (
    analytic_gradient_distortion,
    analytic_gradient_distortion_exponential,
    gradient_allocation_fd,
    gradient_reward_allocation_distorted,
    normalized_with_without,
    subgradient_allocation,
    subgradient_density,
    supergradient_allocation,
    supergradient_density,
    with_without_allocation,
)
from capalloc.axioms import RISK_AXIOMS, check_condition_A, check_risk_axioms
from capalloc.cli import run
from capalloc.game import (
    GameInstance,
    admissible_coalitions,
    check_allocation_properties,
    game_allocation,
    marginal_contribution,
    verify_def_4_1,
)
from capalloc.measures import (
    Distorted,
    Distortion,
    DistortionExponential,
    Entropic,
    Expectation,
    ExpectedShortfall,
    Robust,
    ValueAtRisk,
    choquet_integral,
)
from capalloc.performance import (
    INFINITY_CONVENTION,
    PLAIN_QUOTIENT,
    ZERO_CONVENTION,
    PortfolioClass,
    classify_portfolio,
    rrr,
)
from capalloc.scenario import ScenarioSet, expectation
from capalloc.suitability import (
    SATISFIED,
    VIOLATED,
    check_thm33_conditions,
    check_thm36_conditions,
    gradient_pair,
    gradient_uniqueness_counterexample,
    portfolio_functions,
    verify_def_3_2,
    verify_def_3_5,
    verify_def_3_7,
)

from conftest import ACCEPTANCE_LINES, random_scenarios, well_separated
from oracles import choquet_trapezoid, es_dual_density

# tolerances pinned to the acceptance criteria
AXIOM_TRIALS = 500
AXIOM_SLACK = 1e-9
RUNTIME_LIMIT = 10.0
CHOQUET_IDENTITY_TOL = 1e-12
CHOQUET_TRAPEZOID_TOL = 1e-6
GRADIENT_INEQ_TOL = 1e-9
FULL_ALLOCATION_TOL = 1e-6
WORKED_EXAMPLE_TOL = 1e-12
FD_STEP = 1e-4
FD_HALF_STEP = 5e-5
FD_RELATIVE_TOL = 1e-4
CONVERGENCE_RATIO = 0.3
MIN_INSTANCES = 200
COUNTEREXAMPLE_TOL = 1e-9
EFFICIENCY_GAP = 1e-6
NORMALIZED_TOL = 1e-9
CLASSIFY_PAIRS = 10**5


def record(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _sub(spec, scn):
    return subgradient_allocation(subgradient_density(spec, scn.total(), scn), scn)


def _sup(spec, scn):
    return supergradient_allocation(supergradient_density(spec, scn.total(), scn), scn)


def _separated_stream(rng, limit=20000, **kw):
    for _ in range(limit):
        scn = random_scenarios(rng, **kw)
        if well_separated(scn, FD_STEP):
            yield scn


def _separated(rng, count, **kw):
    out = []
    for scn in _separated_stream(rng, **kw):
        out.append(scn)
        if len(out) == count:
            break
    return out


def _same_sign(a, b):
    return (a > 0 and b > 0) or (a < 0 and b < 0)


# -- 1 --------------------------------------------------------------------------

def test_criterion_1_axiom_suite():
    start = time.perf_counter()
    scn = ScenarioSet.uniform(np.random.default_rng(1).normal(size=(3, 20)) * 3)
    bad = []
    for level in (0.1, 0.25, 0.5):
        rep = check_risk_axioms(ExpectedShortfall(level), scn, AXIOM_TRIALS, seed=0)
        bad += [f"ES({level}) {a}" for a in RISK_AXIOMS if not rep.passed(a)]
    ent = check_risk_axioms(Entropic(1.0), scn, AXIOM_TRIALS, seed=0)
    bad += [f"Entropic {a}" for a in ("M", "T", "C") if not ent.passed(a)]
    w = ent.results["P"].witness
    p_ok = ent.failed("P") and w is not None
    if p_ok:
        x, lam = np.array(w["X"]), w["lambda"]
        p_ok = abs(Entropic(1.0).evaluate(lam * x, scn) - lam * Entropic(1.0).evaluate(x, scn)) > AXIOM_SLACK
    var = check_risk_axioms(ValueAtRisk(0.25), scn, AXIOM_TRIALS, seed=0)
    s_ok = var.failed("S")
    if s_ok:
        x, y = np.array(var.results["S"].witness["X"]), np.array(var.results["S"].witness["Y"])
        v = ValueAtRisk(0.25)
        s_ok = v.evaluate(x + y, scn) > v.evaluate(x, scn) + v.evaluate(y, scn) + AXIOM_SLACK
    elapsed = time.perf_counter() - start
    ok = not bad and p_ok and s_ok and elapsed < RUNTIME_LIMIT
    record(1, ok, f"ES x3 and Entropic (M)(T)(C) pass over {AXIOM_TRIALS} trials, "
                  f"Entropic (P) witness {p_ok}, VaR (S) witness {s_ok}, failures {bad}, {elapsed:.2f}s")


# -- 2 --------------------------------------------------------------------------

def test_criterion_2_choquet():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_id = 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 30))
        scn = ScenarioSet(rng.dirichlet(np.ones(m)), [rng.normal(size=m) * 5])
        x = scn.positions[0]
        worst_id = max(worst_id, abs(choquet_integral(D.identity(), x, scn) - expectation(x, scn)))
    worst_tr = 0.0
    phis = (D.sqrt(), D.power(2), D.dual_power(3), D.power(0.3))
    for j in range(100):
        m = int(rng.integers(1, 12))
        probs = rng.dirichlet(np.ones(m))
        x = np.round(rng.normal(size=m) * 4, 1)
        scn = ScenarioSet(probs, [x])
        phi = phis[j % len(phis)]
        worst_tr = max(worst_tr, abs(choquet_integral(phi, x, scn) - choquet_trapezoid(phi, x, probs)))
    elapsed = time.perf_counter() - start
    ok = worst_id <= CHOQUET_IDENTITY_TOL and worst_tr <= CHOQUET_TRAPEZOID_TOL and elapsed < RUNTIME_LIMIT
    record(2, ok, f"identity max err {worst_id:.1e} (<= 1e-12, 1000 inst), trapezoid max err {worst_tr:.1e} "
                  f"(<= 1e-6, 100 inst), {elapsed:.2f}s")


# -- 3 --------------------------------------------------------------------------

def test_criterion_3_gradient_inequalities():
    rng = np.random.default_rng(3)
    worst_sub, worst_sup = np.inf, -np.inf
    for _ in range(50):
        scn = random_scenarios(rng, m_range=(4, 20))
        x = scn.total()
        ys = rng.normal(size=(1000, scn.m)) * rng.uniform(0.1, 10)
        risks = (ExpectedShortfall(float(rng.uniform(0.05, 0.95))), Entropic(float(rng.uniform(0.1, 1))), Distortion(D.sqrt()))
        for spec in risks:
            xi = subgradient_density(spec, x, scn)
            r = spec.evaluate(x, scn)
            for y in ys:
                worst_sub = min(worst_sub, spec.evaluate(x + y, scn) - r - xi.pair(y, scn))
        dens = tuple(rng.dirichlet(np.ones(scn.m), size=3) / scn.probs)
        rewards = (Expectation(), Robust(dens), Distorted(D.power(2)))
        for spec in rewards:
            psi = supergradient_density(spec, x, scn)
            t = spec.evaluate(x, scn)
            for y in ys:
                worst_sup = max(worst_sup, spec.evaluate(x + y, scn) - t - psi.pair(y, scn))
    ok = worst_sub >= -GRADIENT_INEQ_TOL and worst_sup <= GRADIENT_INEQ_TOL
    record(3, ok, f"min rho(X+Y)-rho(X)-E[xi Y] = {worst_sub:.1e} (>= -1e-9), "
                  f"max theta(X+Y)-theta(X)-E[psi Y] = {worst_sup:.1e} (<= 1e-9), 50 inst x 1000 dirs")


# -- 4 --------------------------------------------------------------------------

def test_criterion_4_euler_full_allocation():
    rng = np.random.default_rng(4)
    worst = 0.0
    for scn in _separated(rng, MIN_INSTANCES, m_range=(4, 30)):
        x = scn.total()
        level = float(rng.uniform(0.05, 0.95))
        for spec, analytic in (
            (ExpectedShortfall(level), lambda s, sp: _sub(sp, s)),
            (Distortion(D.sqrt()), lambda s, sp: analytic_gradient_distortion(sp.psi, s)),
        ):
            r = spec.evaluate(x, scn)
            for k in (analytic(scn, spec), gradient_allocation_fd(spec, scn, FD_STEP)):
                worst = max(worst, abs(k.total() - r) / max(1.0, abs(r)))
    demo = ScenarioSet.uniform([[-10, 0, 10, 20], [-2, 1, 1, 1]])
    x = demo.total()
    # independent tail density from the greedy dual maximizer
    oracle = -np.array(es_dual_density(x, demo.probs, 0.25))
    k_oracle = demo.positions @ (demo.probs * oracle)
    k = _sub(ExpectedShortfall(0.25), demo).values
    demo_ok = (
        np.max(np.abs(k - [10, 2])) <= WORKED_EXAMPLE_TOL
        and np.max(np.abs(k_oracle - [10, 2])) <= WORKED_EXAMPLE_TOL
        and abs(k.sum() - 12) <= WORKED_EXAMPLE_TOL
    )
    ok = worst <= FULL_ALLOCATION_TOL and demo_ok
    record(4, ok, f"max |sum k - rho|/max(1,|rho|) = {worst:.1e} (<= 1e-6, {MIN_INSTANCES} inst, ES and "
                  f"Distortion, analytic and fd); worked example k = {k.tolist()}")


# -- 5 --------------------------------------------------------------------------

def test_criterion_5_gradient_agreement():
    rng = np.random.default_rng(5)
    eps = np.finfo(float).eps
    worst_rel, e1_all, e2_all = 0.0, 0.0, 0.0
    strict, strict_worst = 0, 0.0
    psis = (D.sqrt(), D.dual_power(2), D.dual_power(3))
    for j, scn in enumerate(_separated(rng, MIN_INSTANCES, m_range=(4, 30))):
        psi, a = psis[j % 3], float(rng.uniform(0.1, 1.0))
        spec = DistortionExponential(psi, a)
        k = analytic_gradient_distortion_exponential(psi, a, scn).values
        f1 = gradient_allocation_fd(spec, scn, FD_STEP).values
        f2 = gradient_allocation_fd(spec, scn, FD_HALF_STEP).values
        worst_rel = max(worst_rel, float(np.max(np.abs(f1 - k) / np.abs(k))))
        e1, e2 = float(np.max(np.abs(f1 - k))), float(np.max(np.abs(f2 - k)))
        e1_all, e2_all = max(e1_all, e1), max(e2_all, e2)
        # rounding in the centered difference is about eps * |X| / h
        floor = eps * max(1.0, float(np.max(np.abs(scn.positions)))) / FD_STEP
        if e1 > 100 * floor:
            strict += 1
            strict_worst = max(strict_worst, e2 / e1)
    ratio = e2_all / e1_all
    ok = worst_rel <= FD_RELATIVE_TOL and ratio <= CONVERGENCE_RATIO and strict_worst <= CONVERGENCE_RATIO
    record(5, ok, f"max relative fd error {worst_rel:.1e} (<= 1e-4, {MIN_INSTANCES} inst); "
                  f"error ratio e(5e-5)/e(1e-4) = {ratio:.3f} over the set, worst {strict_worst:.3f} "
                  f"on the {strict} instances above 100x rounding floor (<= 0.3)")


# -- 6 --------------------------------------------------------------------------

def test_criterion_6_sufficient_conditions_imply_suitability():
    rng = np.random.default_rng(6)
    qualified, satisfied, violations = 0, 0, 0
    theta = Expectation()
    attempts = 0
    while qualified < MIN_INSTANCES and attempts < 2000:
        attempts += 1
        scn = random_scenarios(rng)
        spec = ExpectedShortfall(float(rng.uniform(0.1, 0.9))) if attempts % 2 else Entropic(float(rng.uniform(0.1, 1.0)))
        r = spec.evaluate(scn.total(), scn)
        if abs(r) < 1e-12 or not check_condition_A(spec, scn).all():
            continue
        k = _sub(spec, scn)
        if check_thm33_conditions(k, spec, scn).status != SATISFIED:
            continue
        qualified += 1
        v = verify_def_3_2(k, theta, spec, scn)
        satisfied += v.status == SATISFIED
        violations += len(v.violations)
    witness = None
    rng2 = np.random.default_rng(60)
    for _ in range(50):
        scn = random_scenarios(rng2)
        v = check_thm33_conditions(with_without_allocation(Entropic(1.0), scn), Entropic(1.0), scn)
        if v.status == VIOLATED:
            witness = v.violations[0].witness
            break
    ok = qualified >= MIN_INSTANCES and satisfied == qualified and violations == 0 and witness is not None
    record(6, ok, f"{satisfied}/{qualified} qualified instances satisfied, {violations} violations; "
                  f"with-without Entropic witness: {witness and witness['condition']} at h={witness and witness['h']}")


# -- 7 --------------------------------------------------------------------------

def test_criterion_7_reward_risk_pairs():
    rng = np.random.default_rng(7)
    pairs, pair_sat, attempts = 0, 0, 0
    while pairs < MIN_INSTANCES and attempts < 3000:
        attempts += 1
        scn = ScenarioSet.uniform(rng.normal(loc=0.4, size=(int(rng.integers(2, 5)), 10)) * 3)
        dens = tuple(rng.dirichlet(np.ones(scn.m), size=3) * scn.m)
        theta = Robust(dens)
        rho = ExpectedShortfall(float(rng.uniform(0.1, 0.9))) if attempts % 2 else Entropic(0.5)
        if not _same_sign(theta.evaluate(scn.total(), scn), rho.evaluate(scn.total(), scn)):
            continue
        pairs += 1
        t, k = _sup(theta, scn), _sub(rho, scn)
        pair_sat += verify_def_3_5(t, k, theta, rho, scn).status == SATISFIED
    grads, grad_sat = 0, 0
    # a mild reward distortion against a strong risk distortion leaves room
    # for portfolios whose reward and risk share a sign
    phi, psi = D.power(1.5), D.dual_power(3)
    theta, rho = Distorted(phi), Distortion(psi)
    for scn in _separated_stream(rng, m_range=(4, 20)):
        if grads >= MIN_INSTANCES:
            break
        if not _same_sign(theta.evaluate(scn.total(), scn), rho.evaluate(scn.total(), scn)):
            continue
        grads += 1
        t = gradient_reward_allocation_distorted(phi, scn)
        k = analytic_gradient_distortion(psi, scn)
        ok36 = check_thm36_conditions(t, k, theta, rho, scn).status == SATISFIED
        grad_sat += ok36 and verify_def_3_5(t, k, theta, rho, scn).status == SATISFIED
    ok = pairs >= MIN_INSTANCES and pair_sat == pairs and grads >= MIN_INSTANCES and grad_sat == grads
    record(7, ok, f"super/subgradient pairs {pair_sat}/{pairs} satisfied; distortion gradient pairs "
                  f"{grad_sat}/{grads} satisfied")


# -- 8 --------------------------------------------------------------------------

def test_criterion_8_gradient_reward_risk_allocation():
    rng = np.random.default_rng(8)
    count, sat = 0, 0
    combos = ((Expectation(), Entropic(0.5)), (Distorted(D.power(2)), DistortionExponential(D.sqrt(), 0.5)))
    for scn in _separated_stream(rng, m_range=(6, 20)):
        if count >= MIN_INSTANCES:
            break
        theta, rho = combos[count % 2]
        tf, rf = portfolio_functions(theta, rho, scn)
        u = np.ones(scn.n)
        if not _same_sign(tf(u), rf(u)):
            continue
        count += 1
        t, k = gradient_pair(tf, rf, u, FD_STEP)
        sat += verify_def_3_7(t, k, tf, rf, u, FD_STEP).status == SATISFIED
    worst = 0.0
    for scn in _separated(rng, 20, m_range=(6, 20)):
        _, rf = portfolio_functions(Expectation(), ExpectedShortfall(0.25), scn)
        u = np.ones(scn.n)
        if abs(rf(u)) < 1e-6:
            continue
        k = gradient_pair(rf, rf, u, FD_STEP)[1].copy()
        k[0] += 1.0
        for ts in (1.0, 2.0, 5.0):
            w = gradient_uniqueness_counterexample(k, rf, u, 0, ts, FD_STEP)
            worst = max(worst, w.max_deviation)
    ok = count >= MIN_INSTANCES and sat == count and worst <= COUNTEREXAMPLE_TOL
    record(8, ok, f"(a) fd gradient pairs {sat}/{count} satisfied; (b) counterexample max "
                  f"|alpha - t_scale| = {worst:.1e} (<= 1e-9) for t_scale 1, 2, 5")


# -- 9 --------------------------------------------------------------------------

def test_criterion_9_game_suite():
    rng = np.random.default_rng(9)
    games, passing, violations, verdicts = 0, 0, 0, 0
    while games < 300:
        n, m = int(rng.integers(2, 6)), int(rng.integers(4, 12))
        scn = ScenarioSet.uniform(rng.normal(loc=0.5, size=(n, m)) * 3)
        rho = ExpectedShortfall(float(rng.uniform(0.1, 0.9))) if games % 2 else Entropic(0.5)
        g = GameInstance(scn, Expectation(), rho)
        games += 1
        kappa = game_allocation(g, marginal_contribution)
        sat_here = 0
        for S in admissible_coalitions(g):
            v = verify_def_4_1(g, kappa, S)
            violations += len(v.violations)
            sat_here += v.status == SATISFIED
            verdicts += 1
        passing += sat_here > 0
    demo = ScenarioSet.uniform([[-6, 2, 4, 8], [4, -6, 2, 8]])
    es = ExpectedShortfall(0.25)
    g = GameInstance(demo, Expectation(), es)
    ww = with_without_allocation(es, demo)
    gap = check_allocation_properties(g, ww).efficiency_residual
    nres = check_allocation_properties(g, normalized_with_without(es, demo)).efficiency_residual
    rng2 = np.random.default_rng(90)
    exact = True
    for _ in range(50):
        scn = random_scenarios(rng2)
        gi = GameInstance(scn, Expectation(), es)
        w = with_without_allocation(es, scn).values
        exact &= all(marginal_contribution(gi, gi.grand().remove(i), i) == w[i] for i in range(scn.n))
    ok = passing >= MIN_INSTANCES and violations == 0 and abs(gap) > EFFICIENCY_GAP and abs(nres) <= NORMALIZED_TOL and exact
    record(9, ok, f"marginal contribution: {passing} games with satisfied verdicts, {violations} violations "
                  f"over {verdicts} verdicts; with-without gap {gap:.3g}; normalized residual {nres:.1e}; "
                  f"marginal(N-i, i) == with-without exactly: {exact}")


# -- 10 -------------------------------------------------------------------------

def test_criterion_10_ratio_conventions():
    cases = [
        ((-1.0, 2.0), (0.0, ZERO_CONVENTION)),
        ((0.0, 0.0), (0.0, ZERO_CONVENTION)),
        ((1.0, 0.0), (float("inf"), INFINITY_CONVENTION)),
        ((1.0, -2.0), (float("inf"), INFINITY_CONVENTION)),
        ((3.0, 2.0), (1.5, PLAIN_QUOTIENT)),
        ((-3.0, -2.0), (1.5, PLAIN_QUOTIENT)),
    ]
    exact = all((rrr(*a).value, rrr(*a).case) == b for a, b in cases)
    rng = np.random.default_rng(10)
    vals = rng.normal(size=(CLASSIFY_PAIRS, 2))
    zero = rng.random(size=vals.shape) < 0.1
    vals[zero] = 0.0
    partition = True
    for t, r in vals:
        c = classify_portfolio(t, r)
        member = {
            PortfolioClass.ARBITRAGE: t > 0 and r <= 0,
            PortfolioClass.IRRATIONAL: (t <= 0 and r > 0) or (t == 0 and r == 0),
            PortfolioClass.BOTH_POSITIVE: t > 0 and r > 0,
        }
        member[PortfolioClass.BOTH_NEGATIVE] = not any(member.values())
        if sum(member.values()) != 1 or not member[c]:
            partition = False
            break
    ok = exact and partition
    record(10, ok, f"convention cases exact: {exact}; partition on {CLASSIFY_PAIRS} pairs "
                   f"({int(zero.any(axis=1).sum())} with a zero coordinate): {partition}")


# -- 11 -------------------------------------------------------------------------

def _cli(*argv):
    out = io.StringIO()
    code = run(list(argv), out, io.StringIO())
    return code, out.getvalue()


def test_criterion_11_cli(tmp_path):
    code_a, out_a = _cli("allocate", "--demo", "euler", "--kind", "subgradient", "--kind", "gradient_fd", "--json", "-")
    rep_a = json.loads(out_a)
    sub, fd = rep_a["allocations"]
    c4 = (
        code_a == 0
        and rep_a["rho_X"] == 12.0
        and sub["values"] == [10.0, 2.0]
        and abs(sum(sub["values"]) - 12.0) <= WORKED_EXAMPLE_TOL
        and abs(fd["residual"]) <= FULL_ALLOCATION_TOL * 12.0
    )
    code_g, out_g = _cli("game", "--demo", "game", "--json", "-")
    h = json.loads(out_g)["headline"]
    c9 = (
        abs(h["with_without_efficiency_gap"]) > EFFICIENCY_GAP
        and abs(h["normalized_residual"]) <= NORMALIZED_TOL
        and h["marginal_equals_with_without"] is True
    )
    stable = True
    for argv in (
        ("allocate", "--demo", "euler", "--kind", "subgradient", "--kind", "gradient_fd", "--seed", "11"),
        ("game", "--demo", "game", "--seed", "11"),
        ("axioms", "--demo", "euler", "--measure", "var:0.25", "--trials", "100", "--seed", "11"),
    ):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run([*argv, "--json", str(a)], io.StringIO(), io.StringIO())
        run(["--config", str(a), "--json", str(b)], io.StringIO(), io.StringIO())
        stable &= a.read_bytes() == b.read_bytes() and a.read_bytes() == _cli(*argv, "--json", "-")[1].encode()
    ok = c4 and c9 and stable
    record(11, ok, f"allocate k = {sub['values']}, rho = {rep_a['rho_X']}; game gap "
                   f"{h['with_without_efficiency_gap']}, normalized residual {h['normalized_residual']}; "
                   f"byte-stable round trip: {stable}")
