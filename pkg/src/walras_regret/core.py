"""Market data model, regret evaluation and the demand oracle.

All arithmetic is exact: valuations and prices are ``Fraction`` values,
bundles and capacities are tuples of Python ints. A strategy profile is a
tuple holding one bundle index per player.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

from .errors import (
    InfeasibleProfileError,
    InvalidPricesError,
    InvalidProfileError,
    StructuralError,
    ValidationError,
)

Bundle = tuple[int, ...]
Profile = tuple[int, ...]
Prices = tuple[Fraction, ...]


def as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("binary floats are not accepted; use Fraction or 'p/q' strings")
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class MarketInstance:
    """Players, resources with integer capacities and explicit strategy spaces.

    ``bundles[i][l]`` is the l-th bundle of player i and ``values[i][l]`` its
    valuation. Bundle lists must contain the zero bundle valued 0, be
    duplicate free and stay within the capacities.
    """

    capacities: tuple[int, ...]
    bundles: tuple[tuple[Bundle, ...], ...]
    values: tuple[tuple[Fraction, ...], ...]
    name: str = ""
    notes: tuple[str, ...] = field(default=(), compare=True)

    def __post_init__(self):
        caps = tuple(int(u) for u in self.capacities)
        bundles = tuple(tuple(tuple(int(v) for v in b) for b in player) for player in self.bundles)
        values = tuple(tuple(as_fraction(v) for v in player) for player in self.values)
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "bundles", bundles)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "notes", tuple(self.notes))
        self._validate()

    def _validate(self):
        m = len(self.capacities)
        if m < 1:
            raise ValidationError("at least one resource is required", "schema")
        if len(self.bundles) < 1:
            raise ValidationError("at least one player is required", "schema")
        if any(u < 0 for u in self.capacities):
            raise ValidationError("capacities must be nonnegative", "schema")
        if len(self.values) != len(self.bundles):
            raise ValidationError("one valuation list per player is required", "schema")
        zero = (0,) * m
        for i, (player, vals) in enumerate(zip(self.bundles, self.values), start=1):
            if len(player) != len(vals):
                raise ValidationError(f"player {i}: bundle and value counts differ", "schema")
            seen: dict[Bundle, int] = {}
            for l, b in enumerate(player, start=1):
                if len(b) != m:
                    raise ValidationError(f"player {i}, bundle {l}: expected {m} entries", "schema")
                if any(v < 0 for v in b):
                    raise ValidationError(f"player {i}, bundle {l}: negative entry", "schema")
                if any(v > u for v, u in zip(b, self.capacities)):
                    raise ValidationError(
                        f"bundle exceeds capacity, player {i}, bundle {l}", "bundle-exceeds-capacity"
                    )
                if b in seen:
                    raise ValidationError(
                        f"duplicate bundle, player {i}, bundles {seen[b]} and {l}", "duplicate-bundle"
                    )
                seen[b] = l
            if zero not in seen:
                raise ValidationError(f"missing zero bundle, player {i}", "missing-zero-bundle")
            if vals[seen[zero] - 1] != 0:
                raise ValidationError(f"zero bundle must be valued 0, player {i}", "zero-bundle-value")

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def sizes(self) -> tuple[int, ...]:
        """Strategy space sizes k_i."""
        return tuple(len(b) for b in self.bundles)

    @property
    def k(self) -> int:
        return sum(self.sizes)

    @property
    def u_max(self) -> int:
        return max(self.capacities)

    @property
    def profile_count(self) -> int:
        count = 1
        for size in self.sizes:
            count *= size
        return count

    def zero_index(self, player: int) -> int:
        return self.bundles[player].index((0,) * self.m)

    def bundle_index(self, player: int, bundle: Sequence[int]) -> int | None:
        try:
            return self.bundles[player].index(tuple(bundle))
        except ValueError:
            return None

    def zero_profile(self) -> Profile:
        return tuple(self.zero_index(i) for i in range(self.n))


@dataclass(frozen=True)
class RegretBreakdown:
    per_player: tuple[Fraction, ...]
    total: Fraction


class MonotonicityReport(NamedTuple):
    monotone: bool
    upward_closed: bool
    monotone_witness: tuple[int, Bundle, Bundle] | None
    upward_witness: tuple[int, Bundle, Bundle] | None


def check_profile(instance: MarketInstance, profile: Sequence[int]) -> Profile:
    profile = tuple(profile)
    if len(profile) != instance.n:
        raise InvalidProfileError(f"profile has {len(profile)} entries, expected {instance.n}")
    for i, l in enumerate(profile):
        if not isinstance(l, int) or not 0 <= l < len(instance.bundles[i]):
            raise InvalidProfileError(f"player {i + 1}: bundle index {l!r} out of range")
    return profile


def check_prices(instance: MarketInstance, prices: Sequence) -> Prices:
    prices = tuple(as_fraction(p) for p in prices)
    if len(prices) != instance.m:
        raise InvalidPricesError(f"expected {instance.m} prices, got {len(prices)}")
    if any(p < 0 for p in prices):
        raise InvalidPricesError("prices must be nonnegative")
    return prices


def _cost(prices: Sequence[Fraction], bundle: Bundle) -> Fraction:
    return sum((p * x for p, x in zip(prices, bundle) if x), Fraction(0))


def load(instance: MarketInstance, profile: Sequence[int]) -> tuple[int, ...]:
    profile = check_profile(instance, profile)
    totals = [0] * instance.m
    for i, l in enumerate(profile):
        for j, x in enumerate(instance.bundles[i][l]):
            totals[j] += x
    return tuple(totals)


def is_capacity_feasible(instance: MarketInstance, profile: Sequence[int]) -> bool:
    return all(lj <= uj for lj, uj in zip(load(instance, profile), instance.capacities))


def require_feasible(instance: MarketInstance, profile: Sequence[int]) -> Profile:
    profile = check_profile(instance, profile)
    if not is_capacity_feasible(instance, profile):
        raise InfeasibleProfileError(f"profile {profile} exceeds the capacities")
    return profile


def slack_resources(instance: MarketInstance, profile: Sequence[int]) -> tuple[int, ...]:
    """Indices j with load strictly below capacity."""
    ell = load(instance, profile)
    return tuple(j for j, (lj, uj) in enumerate(zip(ell, instance.capacities)) if lj < uj)


def is_market_clearing(instance: MarketInstance, profile: Sequence[int], prices: Sequence) -> bool:
    """True iff prices vanish on every resource with slack (complementarity)."""
    profile = require_feasible(instance, profile)
    prices = check_prices(instance, prices)
    return all(prices[j] == 0 for j in slack_resources(instance, profile))


def welfare_value(instance: MarketInstance, profile: Sequence[int]) -> Fraction:
    profile = check_profile(instance, profile)
    return sum((instance.values[i][l] for i, l in enumerate(profile)), Fraction(0))


def utility(instance: MarketInstance, player: int, index: int, prices: Sequence[Fraction]) -> Fraction:
    return instance.values[player][index] - _cost(prices, instance.bundles[player][index])


def best_response(instance: MarketInstance, player: int, prices: Sequence) -> tuple[int, Fraction]:
    """Demand oracle: a utility-maximizing bundle index and its utility.

    Linear scan; ties go to the lowest index.
    """
    prices = check_prices(instance, prices)
    best_l, best_u = 0, None
    for l in range(len(instance.bundles[player])):
        u = utility(instance, player, l, prices)
        if best_u is None or u > best_u:
            best_l, best_u = l, u
    return best_l, best_u


def regret(instance: MarketInstance, profile: Sequence[int], prices: Sequence) -> RegretBreakdown:
    profile = check_profile(instance, profile)
    prices = check_prices(instance, prices)
    per_player = []
    for i, l in enumerate(profile):
        _, best = best_response(instance, i, prices)
        per_player.append(best - utility(instance, i, l, prices))
    per_player = tuple(per_player)
    return RegretBreakdown(per_player, sum(per_player, Fraction(0)))


def check_monotone_upward_closed(instance: MarketInstance) -> MonotonicityReport:
    """Check weak monotonicity of valuations and upward closure of strategy spaces.

    Monotonicity compares only pairs of bundles inside the same strategy
    space. Upward closure asks every integer y with x <= y <= u to be
    present for each listed x. Witnesses are ``(player, x, y)``.
    """
    mono_witness = None
    up_witness = None
    caps = instance.capacities
    for i, (player, vals) in enumerate(zip(instance.bundles, instance.values)):
        present = set(player)
        for a, b in itertools.permutations(range(len(player)), 2):
            if mono_witness is None and vals[a] > vals[b] and all(
                x <= y for x, y in zip(player[a], player[b])
            ):
                mono_witness = (i, player[a], player[b])
                break
        if up_witness is None:
            for x in player:
                ranges = [range(xj, uj + 1) for xj, uj in zip(x, caps)]
                missing = next((y for y in itertools.product(*ranges) if y not in present), None)
                if missing is not None:
                    up_witness = (i, x, missing)
                    break
    return MonotonicityReport(mono_witness is None, up_witness is None, mono_witness, up_witness)


def extend_to_full_load(instance: MarketInstance, profile: Sequence[int]) -> Profile:
    """Give all unused capacity to the first player so the load equals u."""
    profile = require_feasible(instance, profile)
    ell = load(instance, profile)
    gap = tuple(u - lj for u, lj in zip(instance.capacities, ell))
    if not any(gap):
        return profile
    first = instance.bundles[0][profile[0]]
    target = tuple(x + g for x, g in zip(first, gap))
    index = instance.bundle_index(0, target)
    if index is None:
        raise StructuralError(
            f"extended bundle {target} is missing from player 1's strategy space "
            "(instance is not upward-closed)"
        )
    return (index,) + profile[1:]


def feasible_profiles(instance: MarketInstance, full_load: bool = False) -> Iterator[Profile]:
    """Yield X(u) (or the exact-load subset when ``full_load``) in lexicographic order.

    Partial assignments whose load already exceeds u are pruned.
    """
    n, m, caps = instance.n, instance.m, instance.capacities
    bundles = instance.bundles
    choice = [0] * n
    current = [0] * m

    def rec(i: int):
        if i == n:
            if not full_load or tuple(current) == caps:
                yield tuple(choice)
            return
        for l, b in enumerate(bundles[i]):
            if any(c + x > u for c, x, u in zip(current, b, caps)):
                continue
            for j in range(m):
                current[j] += b[j]
            choice[i] = l
            yield from rec(i + 1)
            for j in range(m):
                current[j] -= b[j]

    yield from rec(0)


def all_profiles(instance: MarketInstance) -> Iterator[Profile]:
    return itertools.product(*(range(size) for size in instance.sizes))
