"""Network valuations: each player routes an integral s_i -> t_i flow.

Resources are arcs. A player's strategy space is every integral,
circulation-free flow from s_i to t_i with value at most d_i and per-arc
amounts within the arc capacities; its valuation is the flow value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

from .core import MarketInstance
from .errors import CapExceededError, ValidationError

FLOW_CAP = 10**5

Vertex = Hashable
Arc = tuple[Vertex, Vertex]


@dataclass(frozen=True)
class FlowMarketSpec:
    vertices: tuple
    arcs: tuple[Arc, ...]
    capacities: tuple[int, ...]
    terminals: tuple[tuple[Vertex, Vertex], ...]
    demand_caps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arcs", tuple(tuple(a) for a in self.arcs))
        object.__setattr__(self, "capacities", tuple(int(c) for c in self.capacities))
        object.__setattr__(self, "terminals", tuple(tuple(t) for t in self.terminals))
        object.__setattr__(self, "demand_caps", tuple(int(d) for d in self.demand_caps))
        vertices = set(self.vertices)
        if len(vertices) != len(self.vertices):
            raise ValidationError("duplicate vertex", "schema")
        if len(set(self.arcs)) != len(self.arcs):
            raise ValidationError("graph must be simple: duplicate arc", "schema")
        for tail, head in self.arcs:
            if tail == head:
                raise ValidationError(f"graph must be simple: loop at {tail!r}", "schema")
            if tail not in vertices or head not in vertices:
                raise ValidationError(f"arc ({tail!r}, {head!r}) uses an unknown vertex", "schema")
        if len(self.capacities) != len(self.arcs) or any(c < 0 for c in self.capacities):
            raise ValidationError("one nonnegative capacity per arc is required", "schema")
        if not self.terminals or len(self.demand_caps) != len(self.terminals):
            raise ValidationError("one demand cap per terminal pair is required", "schema")
        for i, (s, t) in enumerate(self.terminals, start=1):
            if s == t:
                raise ValidationError(f"player {i}: source equals sink", "schema")
            if s not in vertices or t not in vertices:
                raise ValidationError(f"player {i}: unknown terminal", "schema")
        if any(d < 0 for d in self.demand_caps):
            raise ValidationError("demand caps must be nonnegative", "schema")


def flow_value(spec: FlowMarketSpec, source: Vertex, flow: Sequence[int]) -> int:
    out = sum(x for (tail, _), x in zip(spec.arcs, flow) if tail == source)
    back = sum(x for (_, head), x in zip(spec.arcs, flow) if head == source)
    return out - back


def _acyclic(spec: FlowMarketSpec, flow: Sequence[int]) -> bool:
    indeg = {v: 0 for v in spec.vertices}
    succ = {v: [] for v in spec.vertices}
    for (tail, head), x in zip(spec.arcs, flow):
        if x:
            succ[tail].append(head)
            indeg[head] += 1
    stack = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen == len(spec.vertices)


def player_flows(spec: FlowMarketSpec, player: int, cap: int = FLOW_CAP) -> list[tuple[int, ...]]:
    """Integral circulation-free s->t flows of one player, zero flow first.

    Arcs are assigned in order; conservation is checked at a vertex as soon
    as its last incident arc has been assigned.
    """
    s, t = spec.terminals[player]
    d = spec.demand_caps[player]
    arcs, caps = spec.arcs, spec.capacities
    closing: dict[int, list[Vertex]] = {}
    last = {}
    for idx, (tail, head) in enumerate(arcs):
        last[tail] = idx
        last[head] = idx
    for v, idx in last.items():
        closing.setdefault(idx, []).append(v)
    balance = {v: 0 for v in spec.vertices}
    flow = [0] * len(arcs)
    found: list[tuple[int, ...]] = []

    def closed_ok(idx: int) -> bool:
        for v in closing.get(idx, ()):
            if v == s:
                if not 0 <= balance[v] <= d:
                    return False
            elif v != t and balance[v] != 0:
                return False
        return True

    def rec(idx: int):
        if idx == len(arcs):
            if _acyclic(spec, flow):
                found.append(tuple(flow))
                if len(found) > cap:
                    raise CapExceededError(f"player {player + 1} has more than {cap} integral flows")
            return
        tail, head = arcs[idx]
        for x in range(caps[idx] + 1):
            flow[idx] = x
            balance[tail] += x
            balance[head] -= x
            if closed_ok(idx):
                rec(idx + 1)
            balance[tail] -= x
            balance[head] += x
        flow[idx] = 0

    rec(0)
    return found


def gen_flow_market(spec: FlowMarketSpec, cap: int = FLOW_CAP, name: str = "flow") -> MarketInstance:
    bundles, values = [], []
    for i, (s, _) in enumerate(spec.terminals):
        flows = player_flows(spec, i, cap)
        bundles.append(tuple(flows))
        values.append(tuple(Fraction(flow_value(spec, s, f)) for f in flows))
    arcs = ", ".join(f"{a}->{b}" for a, b in spec.arcs)
    pairs = ", ".join(f"{s}->{t}" for s, t in spec.terminals)
    notes = (f"resources are arcs: {arcs}", f"terminal pairs: {pairs}")
    return MarketInstance(spec.capacities, tuple(bundles), tuple(values), name=name, notes=notes)


def conservation_violations(spec: FlowMarketSpec, instance: MarketInstance) -> list[str]:
    """Walk every bundle of every player and report conservation failures.

    Independent of the enumerator: recomputes each vertex balance from the
    arc list and checks the bundle value against the valuation.
    """
    problems = []
    for i, ((s, t), player, vals) in enumerate(zip(spec.terminals, instance.bundles, instance.values)):
        for l, (bundle, value) in enumerate(zip(player, vals)):
            net = {v: 0 for v in spec.vertices}
            for (tail, head), x in zip(spec.arcs, bundle):
                net[tail] += x
                net[head] -= x
            for v, b in net.items():
                if v not in (s, t) and b != 0:
                    problems.append(f"player {i + 1}, bundle {l}: imbalance {b} at {v}")
            if net[s] != value or net[t] != -value:
                problems.append(f"player {i + 1}, bundle {l}: value {value} but net outflow {net[s]}")
    return problems


def _spec(arcs, terminals, caps=None, demands=None) -> FlowMarketSpec:
    vertices = []
    for a in arcs:
        for v in a:
            if v not in vertices:
                vertices.append(v)
    for pair in terminals:
        for v in pair:
            if v not in vertices:
                vertices.append(v)
    return FlowMarketSpec(
        tuple(vertices),
        tuple(arcs),
        tuple(caps or (1,) * len(arcs)),
        tuple(terminals),
        tuple(demands or (1,) * len(terminals)),
    )


def flow_gadget(name: str) -> FlowMarketSpec:
    """Small named networks.

    ``single-arc``: one player, one unit arc. ``shared-arc``: two players
    whose only route is the same unit arc. ``triangle``: directed 3-cycle
    with three commodities, each routed over two consecutive arcs, so any
    two commodities collide while the LP can send half of each.
    ``crossing``: two commodities with two routes each, every route of one
    crossing every route of the other on a private unit arc.
    """
    if name == "single-arc":
        return _spec([("s", "t")], [("s", "t")])
    if name == "shared-arc":
        return _spec([("a", "b"), ("s1", "a"), ("s2", "a"), ("b", "t1"), ("b", "t2")], [("s1", "t1"), ("s2", "t2")])
    if name == "triangle":
        return _spec([("a", "b"), ("b", "c"), ("c", "a")], [("a", "c"), ("b", "a"), ("c", "b")])
    if name == "crossing":
        arcs = [(f"p{j}", f"q{j}") for j in range(1, 5)]
        arcs += [
            ("s1", "p1"), ("q1", "p2"), ("q2", "t1"),
            ("s1", "p3"), ("q3", "p4"), ("q4", "t1"),
            ("s2", "p1"), ("q1", "p3"), ("q3", "t2"),
            ("s2", "p2"), ("q2", "p4"), ("q4", "t2"),
        ]
        return _spec(arcs, [("s1", "t1"), ("s2", "t2")])
    raise ValueError(f"unknown flow gadget {name!r}")


FLOW_GADGETS = ("single-arc", "shared-arc", "triangle", "crossing")
