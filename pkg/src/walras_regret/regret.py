"""Regret-minimal prices, sensitivity and lifted integrality gaps.

For a fixed capacity-feasible profile the regret-minimal market-clearing
prices come from a small LP with one epigraph variable per player. The
exponential-row form over all of X is kept as ``price_lp_monolithic`` and
serves as an independent oracle for it.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

from . import lp as lpmod
from .core import (
    MarketInstance,
    Prices,
    Profile,
    all_profiles,
    check_monotone_upward_closed,
    check_profile,
    feasible_profiles,
    is_market_clearing,
    load,
    regret,
    require_feasible,
    slack_resources,
    welfare_value,
)
from .errors import BoundViolationError, CapExceededError, InvalidPricesError
from .welfare import build_config_lp, duality_gap, integrality_gap, rho, solve_dual_prices

PROFILE_CAP = 10**4
ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class PricingResult:
    lam: Prices
    delta: Fraction
    per_player_delta: tuple[Fraction, ...]


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: Fraction
    relation: str
    rhs: Fraction

    @property
    def holds(self) -> bool:
        if self.relation == "<=":
            return self.lhs <= self.rhs
        if self.relation == "=":
            return self.lhs == self.rhs
        raise ValueError(self.relation)


@dataclass(frozen=True)
class GapCertificate:
    """Gap values of a profile together with every checked bound.

    ``gamma`` is the duality gap against an optimal D-LP price vector;
    ``gamma_at_prices`` the duality gap at the prices supplied to
    ``certify``. ``regret`` is evaluated at the supplied prices and
    ``delta`` is the optimal regret for the profile.
    """

    gamma: Fraction
    gamma_at_prices: Fraction
    iota: Fraction
    beta: Fraction
    iota_lift: Fraction
    regret: Fraction
    delta: Fraction
    bounds_checked: tuple[BoundCheck, ...] = field(default=())


class MinRegretResult(NamedTuple):
    profile: Profile
    prices: Prices
    regret: Fraction


def tight_resources(instance: MarketInstance, profile: Sequence[int]) -> tuple[int, ...]:
    ell = load(instance, profile)
    return tuple(j for j, (lj, u) in enumerate(zip(ell, instance.capacities)) if lj == u)


def _expand_prices(instance: MarketInstance, tight: Sequence[int], values: Sequence[Fraction]) -> Prices:
    lam = [Fraction(0)] * instance.m
    for j, v in zip(tight, values):
        lam[j] = v
    return tuple(lam)


def build_price_lp(instance: MarketInstance, profile: Sequence[int]) -> lpmod.LinearProgram:
    """Separable price LP for a fixed profile.

    Variables: lambda_j for tight resources (slack resources are priced 0
    and left out), then one epigraph variable d_i >= 0 per player with
    d_i >= pi_i(z) - pi_i(x_i) - lambda^T (z - x_i) for every z in X_i.
    """
    profile = require_feasible(instance, profile)
    tight = tight_resources(instance, profile)
    n, t = instance.n, len(tight)
    rows = []
    for i, l0 in enumerate(profile):
        own = instance.bundles[i][l0]
        own_value = instance.values[i][l0]
        for l, z in enumerate(instance.bundles[i]):
            if l == l0:
                continue
            coeffs = [Fraction(z[j] - own[j]) for j in tight] + [Fraction(int(p == i)) for p in range(n)]
            rows.append(
                lpmod.Constraint(tuple(coeffs), lpmod.GE, instance.values[i][l] - own_value, f"dev[{i + 1},{l}]")
            )
    labels = tuple(f"lambda[{j + 1}]" for j in tight) + tuple(f"d[{i + 1}]" for i in range(n))
    objective = (Fraction(0),) * t + (Fraction(1),) * n
    size = t + n
    return lpmod.LinearProgram("min", objective, tuple(rows), (Fraction(0),) * size, (None,) * size, labels)


def optimal_prices_for(instance: MarketInstance, profile: Sequence[int]) -> PricingResult:
    """Regret-minimal market-clearing prices for a fixed capacity-feasible profile."""
    profile = require_feasible(instance, profile)
    tight = tight_resources(instance, profile)
    sol = lpmod.solve(build_price_lp(instance, profile))
    assert sol.optimal, f"price LP reported {sol.status}"
    t = len(tight)
    lam = _expand_prices(instance, tight, sol.primal[:t])
    return PricingResult(lam, sol.value, tuple(sol.primal[t:]))


def build_price_lp_monolithic(instance: MarketInstance, profile: Sequence[int], cap: int = PROFILE_CAP) -> lpmod.LinearProgram:
    """min delta s.t. pi(x) - lambda^T l(x) - (pi(x~) - lambda^T l(x~)) <= delta for every x in X."""
    profile = require_feasible(instance, profile)
    if instance.profile_count > cap:
        raise CapExceededError(f"{instance.profile_count} profiles exceed the monolithic price LP cap {cap}")
    tight = tight_resources(instance, profile)
    own_load = load(instance, profile)
    own_value = welfare_value(instance, profile)
    rows = []
    for x in all_profiles(instance):
        ell = load(instance, x)
        coeffs = tuple(Fraction(own_load[j] - ell[j]) for j in tight) + (Fraction(-1),)
        rhs = own_value - welfare_value(instance, x)
        rows.append(lpmod.Constraint(coeffs, lpmod.LE, rhs, "x=" + ",".join(map(str, x))))
    t = len(tight)
    labels = tuple(f"lambda[{j + 1}]" for j in tight) + ("delta",)
    return lpmod.LinearProgram(
        "min",
        (Fraction(0),) * t + (Fraction(1),),
        tuple(rows),
        (Fraction(0),) * t + (None,),
        (None,) * (t + 1),
        labels,
    )


def price_lp_monolithic(
    instance: MarketInstance, profile: Sequence[int], cap: int = PROFILE_CAP, via: str = "dual"
) -> Fraction:
    """Optimal delta of the exponential-row price LP.

    The LP has one row per profile and few columns, so by default its
    explicit dual (few rows, one column per profile) is solved instead;
    ``via="primal"`` solves the rows directly. Both give the same value.
    """
    prog = build_price_lp_monolithic(instance, profile, cap)
    if via == "dual":
        prog = lpmod.dual_lp(prog)
    elif via != "primal":
        raise ValueError(f"unknown route {via!r}")
    sol = lpmod.solve(prog)
    assert sol.optimal, f"monolithic price LP reported {sol.status}"
    return sol.value


def lift(instance: MarketInstance, v: Sequence[int]) -> tuple[int, ...]:
    """Replace every component below capacity by n * u_max."""
    if len(v) != instance.m or any(x < 0 for x in v):
        raise ValueError("lift expects a nonnegative vector with one entry per resource")
    top = instance.n * instance.u_max
    return tuple(top if x < u else int(x) for x, u in zip(v, instance.capacities))


def sensitivity_gap(instance: MarketInstance, rhs_hi: Sequence[int], rhs_lo: Sequence[int]) -> Fraction:
    return rho(instance, rhs_hi) - rho(instance, rhs_lo)


def lifted_integrality_gap(instance: MarketInstance, profile: Sequence[int]) -> Fraction:
    profile = require_feasible(instance, profile)
    return rho(instance, lift(instance, load(instance, profile))) - welfare_value(instance, profile)


def support_relaxed_lp_value(instance: MarketInstance, profile: Sequence[int]) -> Fraction:
    """Configuration LP with resource rows only on tight resources, minus pi(x~).

    Cross-checked against the lifted right-hand side formulation.
    """
    profile = require_feasible(instance, profile)
    tight = tight_resources(instance, profile)
    sol = lpmod.solve(build_config_lp(instance, load(instance, profile), resources=tight))
    assert sol.optimal, f"support-relaxed LP reported {sol.status}"
    value = sol.value - welfare_value(instance, profile)
    lifted = lifted_integrality_gap(instance, profile)
    if value != lifted:
        raise BoundViolationError("support-relaxed value = lifted integrality gap", f"{value} != {lifted}")
    return value


def dp_to_lp_weights(instance: MarketInstance, z: Mapping[Sequence[int], Fraction]) -> tuple[tuple[Fraction, ...], ...]:
    """Marginals of a distribution over profiles: alpha_{i,l} = sum of z_x with x_i = l."""
    alpha = [[Fraction(0)] * size for size in instance.sizes]
    total = Fraction(0)
    for x, w in z.items():
        x = check_profile(instance, x)
        w = Fraction(w)
        if w < 0:
            raise ValueError("profile weights must be nonnegative")
        total += w
        for i, l in enumerate(x):
            alpha[i][l] += w
    if total != 1:
        raise ValueError(f"profile weights sum to {total}, expected 1")
    return tuple(tuple(a) for a in alpha)


def lp_to_dp_weights(
    instance: MarketInstance, alpha: Sequence[Sequence[Fraction]], cap: int = PROFILE_CAP
) -> dict[Profile, Fraction]:
    """Product distribution z_x = prod_i alpha_i(x_i) over all profiles."""
    if len(alpha) != instance.n:
        raise ValueError("one weight vector per player is required")
    for i, a in enumerate(alpha):
        if len(a) != instance.sizes[i] or any(w < 0 for w in a) or sum(a) != 1:
            raise ValueError(f"weights of player {i + 1} are not on the simplex")
    if instance.profile_count > cap:
        raise CapExceededError(f"{instance.profile_count} profiles exceed the cap {cap}")
    z = {}
    for x in all_profiles(instance):
        w = Fraction(1)
        for i, l in enumerate(x):
            w *= alpha[i][l]
            if not w:
                break
        z[x] = w
    return z


def min_regret_exact(
    instance: MarketInstance, restrict_full_load: bool = False, cap: int = ENUMERATION_CAP
) -> MinRegretResult:
    """Minimize regret over X(u) (or over profiles with load exactly u).

    Each enumerated profile gets its optimal prices; ties keep the
    lexicographically smallest profile.
    """
    best = None
    for count, x in enumerate(feasible_profiles(instance, full_load=restrict_full_load), start=1):
        if count > cap:
            raise CapExceededError(f"more than {cap} feasible profiles")
        res = optimal_prices_for(instance, x)
        if best is None or res.delta < best.regret:
            best = MinRegretResult(x, res.lam, res.delta)
    if best is None:
        raise ValueError("no profile with load exactly u exists")
    return best


def slack_price_sum(instance: MarketInstance, profile: Sequence[int], prices: Sequence[Fraction]) -> Fraction:
    return sum((prices[j] for j in slack_resources(instance, profile)), Fraction(0))


def config_matrix(instance: MarketInstance) -> list[list[Fraction]]:
    """Constraint matrix A of the configuration LP: resource rows then simplex rows."""
    owner = [(i, l) for i in range(instance.n) for l in range(instance.sizes[i])]
    rows = [[Fraction(instance.bundles[i][l][j]) for i, l in owner] for j in range(instance.m)]
    rows += [[Fraction(int(o == i)) for o, _ in owner] for i in range(instance.n)]
    return rows


@functools.lru_cache(maxsize=1024)
def config_kappa(instance: MarketInstance, cell_cap: int = lpmod.KAPPA_CELL_CAP) -> Fraction:
    return lpmod.kappa(config_matrix(instance), cell_cap)


@dataclass(frozen=True)
class SensitivityBound:
    beta: Fraction
    c: Fraction
    k: int
    kappa: Fraction
    rhs_shift: int
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.beta <= self.bound


def sensitivity_bound(instance: MarketInstance, profile: Sequence[int], cell_cap: int = lpmod.KAPPA_CELL_CAP) -> SensitivityBound:
    """beta(Lift(l(x)), u) against C * k * kappa(A) * ||b' - b||_inf."""
    profile = require_feasible(instance, profile)
    lifted = lift(instance, load(instance, profile))
    beta = sensitivity_gap(instance, lifted, instance.capacities)
    c = sum((abs(v) for vals in instance.values for v in vals), Fraction(0))
    kap = config_kappa(instance, cell_cap)
    shift = max(abs(a - b) for a, b in zip(lifted, instance.capacities))
    return SensitivityBound(beta, c, instance.k, kap, shift, c * instance.k * kap * shift)


def certify(instance: MarketInstance, profile: Sequence[int], prices: Sequence) -> GapCertificate:
    """Compute every gap for (profile, prices) and check the bounds relating them.

    Raises ``BoundViolationError`` naming the first bound that fails.
    """
    profile = require_feasible(instance, profile)
    if not is_market_clearing(instance, profile, prices):
        raise InvalidPricesError("prices are positive on a resource with slack")
    prices = tuple(Fraction(p) for p in prices)
    dual = solve_dual_prices(instance)
    gamma = duality_gap(instance, profile, dual.lam)
    gamma_here = duality_gap(instance, profile, prices)
    iota = integrality_gap(instance, profile)
    lifted = lift(instance, load(instance, profile))
    beta = sensitivity_gap(instance, lifted, instance.capacities)
    iota_lift = lifted_integrality_gap(instance, profile)
    reg = regret(instance, profile, prices).total
    best = optimal_prices_for(instance, profile)
    relaxed = support_relaxed_lp_value(instance, profile)
    checks = [
        BoundCheck("duality gap <= regret", gamma_here, "<=", reg),
        BoundCheck("integrality gap <= regret", iota, "<=", reg),
        BoundCheck("optimal regret <= regret", best.delta, "<=", reg),
        BoundCheck("optimal dual gap = integrality gap", gamma, "=", iota),
        BoundCheck("optimal regret = sensitivity gap + integrality gap", best.delta, "=", beta + iota),
        BoundCheck("optimal regret = lifted integrality gap", best.delta, "=", iota_lift),
        BoundCheck("support-relaxed LP = lifted integrality gap", relaxed, "=", iota_lift),
        BoundCheck("slack price sum <= duality gap", slack_price_sum(instance, profile, dual.lam), "<=", gamma),
        BoundCheck("optimal prices regret = optimal regret", regret(instance, profile, best.lam).total, "=", best.delta),
    ]
    report = check_monotone_upward_closed(instance)
    if report.monotone and report.upward_closed and load(instance, profile) == instance.capacities:
        # both directions of the equivalence Reg <= D <=> gamma <= D, at D = Reg and D = gamma
        checks.append(BoundCheck("full load: regret <= duality gap", reg, "<=", gamma_here))
        checks.append(BoundCheck("full load: duality gap <= regret", gamma_here, "<=", reg))
    for check in checks:
        if not check.holds:
            raise BoundViolationError(check.name, f"{check.lhs} {check.relation} {check.rhs}")
    return GapCertificate(gamma, gamma_here, iota, beta, iota_lift, reg, best.delta, tuple(checks))

