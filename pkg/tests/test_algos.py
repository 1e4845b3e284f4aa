from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from walras_regret.algos import (
    ALGORITHMS,
    WelfareAlg,
    alg_exact,
    alg_greedy,
    algorithm3,
    algorithm4,
    verified_alpha,
)
from walras_regret.core import MarketInstance, is_capacity_feasible, is_market_clearing, load, welfare_value
from walras_regret.errors import InfeasibleProfileError, StructuralError
from walras_regret.instances import gen_example1, gen_monotone, gen_proposition_instance, gen_random
from walras_regret.regret import min_regret_exact
from walras_regret.welfare import integrality_gap, lp_optimum

F = Fraction
HALF = F(1, 2)

# two players competing for one unit item; the first values it less
COUNTER = MarketInstance((1,), (((0,), (1,)), ((0,), (1,))), ((0, 1), (0, 2)))


def test_alg_exact_examples():
    mono = gen_example1("superset")
    assert welfare_value(mono, alg_exact(mono)) == 1
    assert alg_exact(gen_example1("strict")) == (1, 0, 0)
    assert alg_exact(gen_proposition_instance()) == (1, 0, 0, 0)


def test_alg_greedy_examples():
    mono = gen_example1("superset")
    assert alg_greedy(mono) == (mono.bundle_index(0, (1, 1, 1)), 0, 0)
    assert alg_greedy(gen_example1("strict")) == (1, 0, 0)
    assert welfare_value(COUNTER, alg_greedy(COUNTER)) == 1
    assert welfare_value(COUNTER, alg_exact(COUNTER)) == 2


def test_algorithm3_examples():
    mono = gen_example1("superset")
    out = algorithm3(mono, "exact")
    assert out.regret == HALF and out.alpha == HALF and out.bound == HALF and out.bound_holds
    assert load(mono, out.profile) == mono.capacities
    assert algorithm3(mono, "greedy") == out
    with pytest.raises(StructuralError):
        algorithm3(gen_example1("strict"))


def test_algorithm3_on_greedy_counterexample():
    # already monotone and upward closed: the box below u=(1) is {0, 1}
    out = algorithm3(COUNTER, "greedy")
    assert out.profile == (1, 0)
    assert out.alpha == integrality_gap(COUNTER, (1, 0)) == 1
    assert out.regret <= out.alpha


def test_algorithm4_examples():
    out = algorithm4(gen_example1("strict"), "exact")
    assert out.prices == (HALF, HALF, 0)
    assert out.regret == 1
    assert out.bound == F(3, 2) and out.gamma_bound == F(3, 2)
    mono = gen_example1("superset")
    out = algorithm4(mono, "exact")
    assert out.prices == (HALF, HALF, HALF) and out.regret == HALF
    zero = gen_random(3, 2, 2, 4, value_range=(0, 0), seed=9)
    out = algorithm4(zero)
    assert out.regret == 0 and out.prices == (0, 0)


def test_verified_alpha_examples():
    assert verified_alpha(gen_example1("superset"), (7, 0, 0)) == HALF
    assert verified_alpha(gen_example1("strict"), (1, 0, 0)) == HALF
    walras = MarketInstance((1, 1), (((0, 0), (1, 0)), ((0, 0), (0, 1))), ((0, 2), (0, 3)))
    assert verified_alpha(walras, alg_exact(walras)) == 0
    with pytest.raises(InfeasibleProfileError):
        verified_alpha(gen_example1("strict"), (1, 1, 1))


def test_user_supplied_algorithm_output_is_checked():
    bad = WelfareAlg("overload", lambda inst: (1, 1, 1))
    with pytest.raises(InfeasibleProfileError):
        algorithm4(gen_example1("strict"), bad)
    out = algorithm4(gen_example1("strict"), lambda inst: (0, 0, 0))
    assert out.regret <= out.bound
    assert set(ALGORITHMS) == {"exact", "greedy"}


random_instances = st.builds(
    gen_random,
    n=st.integers(1, 3),
    m=st.integers(1, 4),
    u_max=st.integers(1, 2),
    bundles_per_player=st.integers(1, 5),
    seed=st.integers(0, 10**6),
)


@settings(max_examples=80, deadline=None)
@given(random_instances, st.sampled_from(["exact", "greedy"]))
def test_algorithm4_bounds(inst, name):
    out = algorithm4(inst, name)
    assert is_capacity_feasible(inst, out.profile)
    assert is_market_clearing(inst, out.profile, out.prices)
    factor = 1 + (inst.n - 1) * inst.u_max
    assert out.regret <= out.gamma_bound
    assert out.regret <= verified_alpha(inst, out.profile) * factor
    # optimal dual prices make the duality gap equal the integrality gap
    assert out.gamma_bound == out.bound


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 2), st.integers(0, 10**6), st.sampled_from(["exact", "greedy"]))
def test_algorithm3_bounds_on_monotone(n, m, seed, name):
    inst = gen_monotone(n, m, 2, seed=seed)
    out = algorithm3(inst, name)
    assert out.regret <= verified_alpha(inst, out.profile)
    if name == "exact":
        assert out.regret == min_regret_exact(inst).regret == lp_optimum(inst) - welfare_value(inst, out.profile)
