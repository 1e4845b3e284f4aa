"""Exact minimal-regret Walras equilibria for combinatorial markets.

Everything is computed in rational arithmetic: an exact simplex solver
backs the configuration LP, its Lagrangian dual and the price LPs, and
every reported gap comes with the inequalities that relate it to regret.
"""

from .algos import ALGORITHMS, AlgOutcome, WelfareAlg, alg_exact, alg_greedy, algorithm3, algorithm4, verified_alpha
from .core import (
    MarketInstance,
    RegretBreakdown,
    best_response,
    check_monotone_upward_closed,
    extend_to_full_load,
    feasible_profiles,
    is_capacity_feasible,
    is_market_clearing,
    load,
    regret,
    welfare_value,
)
from .errors import (
    BoundViolationError,
    CapExceededError,
    InfeasibleProfileError,
    InvalidPricesError,
    InvalidProfileError,
    MarketError,
    StructuralError,
    ValidationError,
)
from .flow import FlowMarketSpec, flow_gadget, gen_flow_market
from .instances import gen_example1, gen_monotone, gen_proposition_instance, gen_random, parse, serialize
from .regret import (
    GapCertificate,
    PricingResult,
    certify,
    dp_to_lp_weights,
    lift,
    lifted_integrality_gap,
    lp_to_dp_weights,
    min_regret_exact,
    optimal_prices_for,
    price_lp_monolithic,
    sensitivity_gap,
    support_relaxed_lp_value,
)
from .welfare import duality_gap, integrality_gap, lp_optimum, mu_of_lambda, rho, solve_dual_prices, solve_welfare_exact

__version__ = "0.1.0"
