"""Acceptance gate: one test per criterion, all values exact.

A line per criterion is printed in the terminal summary (see conftest.py).
"""

import json
import random
from fractions import Fraction

import pytest

from walras_regret import lp
from walras_regret.algos import algorithm3, algorithm4
from walras_regret.cli import main
from walras_regret.core import (
    feasible_profiles,
    is_market_clearing,
    load,
    regret,
    slack_resources,
    welfare_value,
)
from walras_regret.errors import CapExceededError
from walras_regret.flow import FLOW_GADGETS, flow_gadget, gen_flow_market
from walras_regret.instances import gen_example1, gen_monotone, gen_proposition_instance, gen_random, parse, serialize
from walras_regret.regret import (
    certify,
    dp_to_lp_weights,
    lift,
    lifted_integrality_gap,
    lp_to_dp_weights,
    min_regret_exact,
    optimal_prices_for,
    price_lp_monolithic,
    sensitivity_bound,
    sensitivity_gap,
    support_relaxed_lp_value,
    tight_resources,
)
from walras_regret.welfare import (
    _rho_cached,
    build_config_lp,
    duality_gap,
    integrality_gap,
    lp_optimum,
    rho,
    solve_dual_prices,
    solve_welfare_exact,
)

F = Fraction
HALF = F(1, 2)

RANDOM_COUNT = 200
MONOTONE_COUNT = 100


def random_suite():
    """200 instances sweeping n <= 3, m <= 4, u_max <= 2 and 2..5 bundles per player."""
    for s in range(RANDOM_COUNT):
        n = 1 + s % 3
        m = 1 + (s // 3) % 4
        u_max = 1 + (s // 12) % 2
        bundles = 2 + (s // 24) % 4
        yield gen_random(n, m, u_max, bundles, seed=s)


def monotone_suite():
    """100 monotone upward-closed instances with n <= 3, m <= 2, u_max <= 2."""
    for s in range(MONOTONE_COUNT):
        n = 1 + s % 3
        m = 1 + (s // 3) % 2
        u_max = 1 + (s // 6) % 2
        yield gen_monotone(n, m, u_max, seed=s)


def sample_prices(rng, instance, support, count):
    out = []
    for _ in range(count):
        lam = [F(0)] * instance.m
        for j in support:
            lam[j] = F(rng.randint(0, 6), rng.randint(1, 4))
        out.append(tuple(lam))
    return out


def check_sensitivity_bound(instance, violations, covered):
    """Record whether the instance fits the kappa cap; check every feasible profile if so."""
    try:
        bounds = [sensitivity_bound(instance, x) for x in feasible_profiles(instance)]
    except CapExceededError:
        return
    covered.append(instance.name)
    for x, b in zip(feasible_profiles(instance), bounds):
        if not b.holds:
            violations.append(f"{instance.name} {x}: beta {b.beta} > {b.bound}")


@pytest.mark.criterion(1, "example 1 superset: min regret 1/2, rho(u) 3/2, welfare 1, iota 1/2")
def test_criterion_1_example1_superset():
    inst = gen_example1("superset")
    opt = solve_welfare_exact(inst)
    assert min_regret_exact(inst).regret == HALF
    assert rho(inst, inst.capacities) == F(3, 2)
    assert opt.value == 1
    assert integrality_gap(inst, opt.profile) == HALF


@pytest.mark.criterion(2, "example 1 strict: min regret 1, delta* = beta + iota = iota_lift at (S_1,0,0)")
def test_criterion_2_example1_strict():
    inst = gen_example1("strict")
    x = (1, 0, 0)
    assert min_regret_exact(inst).regret == 1
    delta = optimal_prices_for(inst, x).delta
    assert lift(inst, load(inst, x)) == (1, 1, 3)
    beta = sensitivity_gap(inst, (1, 1, 3), inst.capacities)
    iota = integrality_gap(inst, x)
    iota_lift = lifted_integrality_gap(inst, x)
    assert (delta, beta, iota, iota_lift) == (1, HALF, HALF, 1)
    assert delta == beta + iota == iota_lift


@pytest.mark.criterion(3, "proposition instance: welfare 3/2, delta* 10/4, regret 2, regret optimum not welfare optimal")
def test_criterion_3_proposition_instance():
    inst = gen_proposition_instance()
    opt = solve_welfare_exact(inst)
    assert opt.value == F(3, 2) and opt.profile == (1, 0, 0, 0)
    assert optimal_prices_for(inst, opt.profile).delta == F(10, 4)
    assert regret(inst, (0, 1, 0, 0), (1, HALF, 0, 0, HALF, 0, 0)).total == 2
    assert min_regret_exact(inst).profile != opt.profile


@pytest.mark.criterion(4, "gap identities and LP certificates over 200 random instances")
def test_criterion_4_random_invariants(monkeypatch):
    violations = []
    solves = {"count": 0}
    real_solve = lp.solve

    def certified_solve(prog):
        sol = real_solve(prog)
        solves["count"] += 1
        if sol.optimal:
            for issue in lp.certificate_issues(prog, sol):
                violations.append(f"(g) {issue}")
        return sol

    monkeypatch.setattr(lp, "solve", certified_solve)
    _rho_cached.cache_clear()
    rng = random.Random(2024)
    count = pairs = 0
    for inst in random_suite():
        count += 1
        name = inst.name
        dual = solve_dual_prices(inst)
        factor = 1 + (inst.n - 1) * inst.u_max
        for x in feasible_profiles(inst):
            iota = integrality_gap(inst, x)
            best = optimal_prices_for(inst, x)
            # (b) optimal regret decomposes into sensitivity and integrality gaps
            beta = sensitivity_gap(inst, lift(inst, load(inst, x)), inst.capacities)
            if not best.delta == beta + iota == lifted_integrality_gap(inst, x):
                violations.append(f"(b) {name} {x}")
            if support_relaxed_lp_value(inst, x) != best.delta:
                violations.append(f"(b) support-relaxed {name} {x}")
            # (e) separable price LP against the exponential-row LP
            if price_lp_monolithic(inst, x) != best.delta:
                violations.append(f"(e) {name} {x}")
            # (a) duality and integrality gap below regret on market-clearing pairs
            tight = tight_resources(inst, x)
            truncated = tuple(p if j in tight else F(0) for j, p in enumerate(dual.lam))
            for lam in [best.lam, truncated, (F(0),) * inst.m] + sample_prices(rng, inst, tight, 2):
                assert is_market_clearing(inst, x, lam)
                pairs += 1
                reg = regret(inst, x, lam).total
                if not (duality_gap(inst, x, lam) <= reg and iota <= reg):
                    violations.append(f"(a) {name} {x} {lam}")
            # (c) slack prices bounded by the duality gap, for any nonnegative prices
            for lam in [dual.lam] + sample_prices(rng, inst, range(inst.m), 2):
                slack_sum = sum((lam[j] for j in slack_resources(inst, x)), F(0))
                if slack_sum > duality_gap(inst, x, lam):
                    violations.append(f"(c) {name} {x} {lam}")
        # (d) Algorithm 4 regret within gamma(x, lambda*) (1 + (n-1) u_max)
        for alg in ("exact", "greedy"):
            out = algorithm4(inst, alg)
            gamma = duality_gap(inst, out.profile, dual.lam)
            if not (out.regret <= gamma * factor and is_market_clearing(inst, out.profile, out.prices)):
                violations.append(f"(d) {name} {alg}")
        # (f) conversions between profile distributions and simplex weights
        sol = real_solve(build_config_lp(inst, inst.capacities))
        alpha, pos = [], 0
        for k in inst.sizes:
            alpha.append(sol.primal[pos : pos + k])
            pos += k
        z = lp_to_dp_weights(inst, alpha)
        if not _conversion_consistent(inst, z, alpha, sol.value):
            violations.append(f"(f) product {name}")
        profiles = list(feasible_profiles(inst))[:4]
        z = {x: F(1, len(profiles)) for x in profiles}
        alpha = dp_to_lp_weights(inst, z)
        objective = sum((inst.values[i][l] * a for i, row in enumerate(alpha) for l, a in enumerate(row)), F(0))
        if not _conversion_consistent(inst, z, alpha, objective):
            violations.append(f"(f) marginals {name}")
    print(f"random suite: {count} instances, {pairs} market-clearing pairs, {solves['count']} certified LP solves")
    assert count >= 200
    assert violations == []


def _conversion_consistent(inst, z, alpha, objective):
    if sum(z.values()) != 1:
        return False
    if sum((w * welfare_value(inst, x) for x, w in z.items()), F(0)) != objective:
        return False
    if sum((a * v for row, vals in zip(alpha, inst.values) for a, v in zip(row, vals)), F(0)) != objective:
        return False
    for j in range(inst.m):
        lp_load = sum(
            (alpha[i][l] * inst.bundles[i][l][j] for i in range(inst.n) for l in range(inst.sizes[i])), F(0)
        )
        if sum((w * load(inst, x)[j] for x, w in z.items()), F(0)) != lp_load:
            return False
    return True


@pytest.mark.criterion(5, "monotone suite over 100 instances: equivalence, Reg <= iota, min regret = rho(u) - welfare")
def test_criterion_5_monotone_suite():
    violations = []
    rng = random.Random(7)
    count = 0
    for inst in monotone_suite():
        count += 1
        name = inst.name
        dual = solve_dual_prices(inst)
        opt = solve_welfare_exact(inst)
        for x in feasible_profiles(inst, full_load=True):
            iota = integrality_gap(inst, x)
            # Reg <= iota at optimal dual prices
            if regret(inst, x, dual.lam).total > iota:
                violations.append(f"Reg <= iota {name} {x}")
            lams = [dual.lam, optimal_prices_for(inst, x).lam] + sample_prices(rng, inst, range(inst.m), 2)
            for lam in lams:
                reg = regret(inst, x, lam).total
                gamma = duality_gap(inst, x, lam)
                # Reg <= D implies gamma <= D at D = Reg; gamma <= D implies Reg <= D at D = gamma
                if not (gamma <= reg and reg <= gamma):
                    violations.append(f"equivalence {name} {x} {lam}")
        best = min_regret_exact(inst)
        if best.regret != lp_optimum(inst) - opt.value:
            violations.append(f"min regret {name}")
        if welfare_value(inst, best.profile) != opt.value:
            violations.append(f"minimizer not welfare optimal {name}")
        if min_regret_exact(inst, restrict_full_load=True).regret != best.regret:
            violations.append(f"full-load restriction {name}")
        out = algorithm3(inst, "exact")
        if out.regret != best.regret:
            violations.append(f"algorithm 3 not optimal {name}")
    print(f"monotone suite: {count} instances")
    assert count >= 100
    assert violations == []


@pytest.mark.criterion(6, "algorithm 3 on superset: 1/2 with bound 1/2; algorithm 4 on strict: 1 with bound 3/2")
def test_criterion_6_algorithms():
    out = algorithm3(gen_example1("superset"), "exact")
    assert (out.regret, out.alpha, out.bound, out.bound_holds) == (HALF, HALF, HALF, True)
    out = algorithm4(gen_example1("strict"), "exact")
    assert (out.regret, out.bound, out.bound_holds) == (1, F(3, 2), True)
    assert out.gamma_bound == F(3, 2)


@pytest.mark.criterion(7, "sensitivity bound beta <= C k kappa(A) ||b' - b|| on every kappa-small suite instance")
def test_criterion_7_sensitivity_bound():
    violations, covered = [], []
    for inst in list(random_suite()) + list(monotone_suite()):
        check_sensitivity_bound(inst, violations, covered)
    for inst in (gen_example1("strict"), gen_flow_market(flow_gadget("shared-arc"))):
        check_sensitivity_bound(inst, violations, covered)
    print(f"sensitivity bound checked on {len(covered)} instances")
    assert len(covered) >= 50
    assert violations == []


@pytest.mark.criterion(8, "round trip, byte-identical generation, identical bases and reports")
def test_criterion_8_exactness(tmp_path, capsys):
    shipped = [
        gen_example1("superset"),
        gen_example1("strict"),
        gen_example1("strict-full"),
        gen_proposition_instance(),
    ] + [gen_flow_market(flow_gadget(g), name=f"flow-{g}") for g in FLOW_GADGETS]
    for inst in shipped + list(random_suite()) + list(monotone_suite()):
        assert parse(serialize(inst)) == inst
    for kind, extra in (("random", ["--seed", "7", "--n", "3", "--m", "4", "--u-max", "2", "--bundles", "5"]),
                        ("monotone", ["--seed", "3", "--n", "2"]),
                        ("flow", ["--gadget", "crossing"]),
                        ("prop", [])):
        paths = [tmp_path / f"{kind}-{r}.txt" for r in range(2)]
        for path in paths:
            assert main(["gen", kind, "-o", str(path)] + extra) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
    for inst in shipped[:4]:
        for prog in (build_config_lp(inst, inst.capacities), build_config_lp(inst, lift(inst, (0,) * inst.m))):
            first, second = lp.solve(prog), lp.solve(prog)
            assert first == second and first.basis == second.basis
    path = tmp_path / "prop-0.txt"
    reports = []
    for _ in range(2):
        assert main(["min-regret", str(path), "--json"]) == 0
        reports.append(capsys.readouterr().out)
    assert reports[0] == reports[1]
    assert json.loads(reports[0])["results"]["welfare_optimal"] is False
    cert = certify(gen_example1("superset"), (7, 0, 0), (HALF, HALF, HALF))
    assert cert == certify(gen_example1("superset"), (7, 0, 0), (HALF, HALF, HALF))
