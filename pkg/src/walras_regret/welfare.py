"""Welfare maximization, the configuration LP and its Lagrangian dual."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import lp as lpmod
from .core import (
    MarketInstance,
    Prices,
    Profile,
    best_response,
    check_prices,
    require_feasible,
    welfare_value,
)
from .errors import CapExceededError

NODE_CAP = 10**7


@dataclass(frozen=True)
class WelfareResult:
    profile: Profile
    value: Fraction
    exhaustive: bool = True


@dataclass(frozen=True)
class DualResult:
    lam: Prices
    mu: tuple[Fraction, ...]
    value: Fraction
    rounds: int = 1


def solve_welfare_exact(instance: MarketInstance, node_cap: int = NODE_CAP) -> WelfareResult:
    """Globally optimal capacity-feasible profile by depth-first enumeration.

    Prunes partial profiles that overload a resource or whose optimistic
    completion (each remaining player at its best valuation) cannot beat
    the incumbent. Bundles are tried in descending index order and only
    strict improvements replace the incumbent, so among tied optima the
    lexicographically greatest index tuple is returned.
    """
    n, m, caps = instance.n, instance.m, instance.capacities
    bundles, values = instance.bundles, instance.values
    best_rest = [Fraction(0)] * (n + 1)
    for i in range(n - 1, -1, -1):
        best_rest[i] = best_rest[i + 1] + max(values[i])
    order = [sorted(range(len(b)), reverse=True) for b in bundles]
    current = [0] * m
    choice = [0] * n
    best_value: Fraction | None = None
    best_profile: Profile | None = None
    nodes = 0

    def rec(i: int, acc: Fraction):
        nonlocal best_value, best_profile, nodes
        nodes += 1
        if nodes > node_cap:
            raise CapExceededError(f"welfare enumeration exceeded {node_cap} nodes; use a heuristic")
        if i == n:
            if best_value is None or acc > best_value:
                best_value, best_profile = acc, tuple(choice)
            return
        if best_value is not None and acc + best_rest[i] <= best_value:
            return
        for l in order[i]:
            b = bundles[i][l]
            if any(c + x > u for c, x, u in zip(current, b, caps)):
                continue
            for j in range(m):
                current[j] += b[j]
            choice[i] = l
            rec(i + 1, acc + values[i][l])
            for j in range(m):
                current[j] -= b[j]

    rec(0, Fraction(0))
    return WelfareResult(best_profile, best_value, True)


def build_config_lp(instance: MarketInstance, rhs: Sequence[int], resources: Sequence[int] | None = None) -> lpmod.LinearProgram:
    """Configuration LP: max sum_i pi_i^T alpha_i s.t. load(alpha) <= rhs, alpha_i on the simplex.

    ``resources`` restricts the resource rows to the given indices (all by
    default); the support-relaxed LP uses this.
    """
    rhs = tuple(rhs)
    if len(rhs) != instance.m or any(v < 0 for v in rhs):
        raise ValueError("rhs must be a nonnegative vector with one entry per resource")
    resources = range(instance.m) if resources is None else resources
    objective, labels, owner = [], [], []
    for i, (player, vals) in enumerate(zip(instance.bundles, instance.values)):
        for l in range(len(player)):
            objective.append(vals[l])
            labels.append(f"alpha[{i + 1},{l}]")
            owner.append((i, l))
    rows = []
    for j in resources:
        coeffs = tuple(Fraction(instance.bundles[i][l][j]) for i, l in owner)
        rows.append(lpmod.Constraint(coeffs, lpmod.LE, Fraction(rhs[j]), f"resource[{j + 1}]"))
    for i in range(instance.n):
        coeffs = tuple(Fraction(int(o == i)) for o, _ in owner)
        rows.append(lpmod.Constraint(coeffs, lpmod.EQ, Fraction(1), f"simplex[{i + 1}]"))
    k = len(objective)
    return lpmod.LinearProgram(
        "max", tuple(objective), tuple(rows), (Fraction(0),) * k, (None,) * k, tuple(labels)
    )


@functools.lru_cache(maxsize=8192)
def _rho_cached(instance: MarketInstance, rhs: tuple[int, ...]) -> Fraction:
    sol = lpmod.solve(build_config_lp(instance, rhs))
    # alpha_i = unit mass on the zero bundle is always feasible and the LP is bounded
    assert sol.optimal, f"configuration LP reported {sol.status}"
    return sol.value


def rho(instance: MarketInstance, rhs: Sequence[int]) -> Fraction:
    """Optimal-value function of the configuration LP in its right-hand side."""
    return _rho_cached(instance, tuple(int(v) for v in rhs))


def lp_optimum(instance: MarketInstance) -> Fraction:
    return rho(instance, instance.capacities)


def build_dual_lp(instance: MarketInstance, cuts: Sequence[tuple[int, int]] | None = None) -> lpmod.LinearProgram:
    """D-LP: min sum mu_i + u^T lambda s.t. mu_i + x_i^l . lambda >= pi_i(x_i^l).

    Variables are ``mu_1..mu_n`` (free) followed by ``lambda_1..lambda_m``
    (nonnegative). ``cuts`` selects the (player, bundle) rows; all by default.
    """
    n, m = instance.n, instance.m
    if cuts is None:
        cuts = [(i, l) for i in range(n) for l in range(len(instance.bundles[i]))]
    rows = []
    for i, l in cuts:
        coeffs = [Fraction(0)] * (n + m)
        coeffs[i] = Fraction(1)
        for j, x in enumerate(instance.bundles[i][l]):
            coeffs[n + j] = Fraction(x)
        rows.append(lpmod.Constraint(tuple(coeffs), lpmod.GE, instance.values[i][l], f"bundle[{i + 1},{l}]"))
    objective = (Fraction(1),) * n + tuple(Fraction(u) for u in instance.capacities)
    return lpmod.LinearProgram(
        "min",
        objective,
        tuple(rows),
        (None,) * n + (Fraction(0),) * m,
        (None,) * (n + m),
        tuple(f"mu[{i + 1}]" for i in range(n)) + tuple(f"lambda[{j + 1}]" for j in range(m)),
    )


def solve_dual_prices(instance: MarketInstance, mode: str = "dense") -> DualResult:
    """Optimal (mu*, lambda*) of D-LP.

    ``dense`` materializes every bundle row. ``rowgen`` starts from the
    zero-bundle rows and adds, round by round, the best-response row of
    every player whose demand utility exceeds its current mu_i.
    """
    n = instance.n
    if mode == "dense":
        sol = lpmod.solve(build_dual_lp(instance))
        assert sol.optimal, f"D-LP reported {sol.status}"
        return DualResult(tuple(sol.primal[n:]), tuple(sol.primal[:n]), sol.value)
    if mode != "rowgen":
        raise ValueError(f"unknown mode {mode!r}")
    cuts = [(i, instance.zero_index(i)) for i in range(n)]
    present = set(cuts)
    rounds = 0
    while True:
        rounds += 1
        sol = lpmod.solve(build_dual_lp(instance, cuts))
        assert sol.optimal, f"restricted D-LP reported {sol.status}"
        mu, lam = sol.primal[:n], sol.primal[n:]
        added = False
        for i in range(n):
            l, util = best_response(instance, i, lam)
            if util > mu[i]:
                assert (i, l) not in present
                cuts.append((i, l))
                present.add((i, l))
                added = True
        if not added:
            return DualResult(tuple(lam), tuple(mu), sol.value, rounds)


def mu_of_lambda(instance: MarketInstance, prices: Sequence) -> Fraction:
    """Lagrangian dual function, evaluated player by player via the demand oracle."""
    prices = check_prices(instance, prices)
    total = sum((p * u for p, u in zip(prices, instance.capacities)), Fraction(0))
    for i in range(instance.n):
        total += best_response(instance, i, prices)[1]
    return total


def duality_gap(instance: MarketInstance, profile: Sequence[int], prices: Sequence) -> Fraction:
    profile = require_feasible(instance, profile)
    return mu_of_lambda(instance, prices) - welfare_value(instance, profile)


def integrality_gap(instance: MarketInstance, profile: Sequence[int]) -> Fraction:
    profile = require_feasible(instance, profile)
    return lp_optimum(instance) - welfare_value(instance, profile)
