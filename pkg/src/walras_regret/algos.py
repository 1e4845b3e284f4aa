"""Welfare algorithms and the reductions that turn their output into low-regret equilibria."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .core import (
    MarketInstance,
    Prices,
    Profile,
    check_monotone_upward_closed,
    extend_to_full_load,
    is_market_clearing,
    load,
    regret,
    require_feasible,
    slack_resources,
)
from .errors import BoundViolationError, StructuralError
from .welfare import duality_gap, integrality_gap, solve_dual_prices, solve_welfare_exact


@dataclass(frozen=True)
class WelfareAlg:
    """A welfare heuristic; ``produce`` must return a capacity-feasible profile."""

    name: str
    produce: Callable[[MarketInstance], Profile]
    description: str = ""

    def __call__(self, instance: MarketInstance) -> Profile:
        return require_feasible(instance, self.produce(instance))


@dataclass(frozen=True)
class AlgOutcome:
    profile: Profile
    prices: Prices
    regret: Fraction
    alpha: Fraction
    bound: Fraction
    bound_holds: bool
    gamma_bound: Fraction | None = None
    source_profile: Profile | None = None


def alg_exact(instance: MarketInstance) -> Profile:
    return solve_welfare_exact(instance).profile


def alg_greedy(instance: MarketInstance) -> Profile:
    """Players in index order take their best-valued bundle that still fits.

    Ties go to the highest bundle index; the zero bundle always fits.
    """
    remaining = list(instance.capacities)
    profile = []
    for player, vals in zip(instance.bundles, instance.values):
        best = None
        for l, b in enumerate(player):
            if all(x <= r for x, r in zip(b, remaining)) and (best is None or vals[l] >= vals[best]):
                best = l
        profile.append(best)
        for j, x in enumerate(player[best]):
            remaining[j] -= x
    return tuple(profile)


ALGORITHMS = {
    "exact": WelfareAlg("exact", alg_exact, "exhaustive branch and bound"),
    "greedy": WelfareAlg("greedy", alg_greedy, "players in order take their best fitting bundle"),
}


def _as_alg(alg) -> WelfareAlg:
    if isinstance(alg, WelfareAlg):
        return alg
    if isinstance(alg, str):
        return ALGORITHMS[alg]
    return WelfareAlg(getattr(alg, "__name__", "custom"), alg)


def verified_alpha(instance: MarketInstance, profile) -> Fraction:
    """Integrality gap certified by a welfare algorithm's output."""
    return integrality_gap(instance, profile)


def algorithm3(instance: MarketInstance, alg="exact") -> AlgOutcome:
    """Monotone reduction: extend the output to full load and price it with optimal dual prices."""
    report = check_monotone_upward_closed(instance)
    if not (report.monotone and report.upward_closed):
        raise StructuralError("algorithm 3 needs monotone valuations and upward-closed strategy spaces")
    alg = _as_alg(alg)
    source = alg(instance)
    profile = extend_to_full_load(instance, source)
    lam = solve_dual_prices(instance).lam
    if not is_market_clearing(instance, profile, lam):
        raise BoundViolationError("dual prices clear the full-load profile", f"profile {profile}")
    reg = regret(instance, profile, lam).total
    alpha = verified_alpha(instance, profile)
    source_alpha = verified_alpha(instance, source)
    if alpha > source_alpha:
        raise BoundViolationError("extension does not increase the integrality gap", f"{alpha} > {source_alpha}")
    holds = reg <= alpha
    if not holds:
        raise BoundViolationError("regret <= verified integrality gap", f"{reg} > {alpha}")
    return AlgOutcome(profile, lam, reg, alpha, alpha, holds, None, source)


def algorithm4(instance: MarketInstance, alg="exact") -> AlgOutcome:
    """General reduction: optimal dual prices, zeroed on resources with slack."""
    alg = _as_alg(alg)
    profile = alg(instance)
    dual = solve_dual_prices(instance).lam
    slack = set(slack_resources(instance, profile))
    lam = tuple(Fraction(0) if j in slack else p for j, p in enumerate(dual))
    if not is_market_clearing(instance, profile, lam):
        raise BoundViolationError("truncated prices clear the market", f"profile {profile}")
    reg = regret(instance, profile, lam).total
    factor = 1 + (instance.n - 1) * instance.u_max
    gamma_bound = duality_gap(instance, profile, dual) * factor
    alpha = verified_alpha(instance, profile)
    bound = alpha * factor
    if reg > gamma_bound:
        raise BoundViolationError("regret <= duality gap * (1 + (n-1) u_max)", f"{reg} > {gamma_bound}")
    holds = reg <= bound
    if not holds:
        raise BoundViolationError("regret <= verified integrality gap * (1 + (n-1) u_max)", f"{reg} > {bound}")
    return AlgOutcome(profile, lam, reg, alpha, bound, holds, gamma_bound, profile)


def full_load(instance: MarketInstance, profile) -> bool:
    return load(instance, profile) == instance.capacities
