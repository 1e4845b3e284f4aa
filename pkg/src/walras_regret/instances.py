"""Instance builders, random generators and the text document format.

Document grammar (one statement per line, ``#`` starts a comment)::

    walras-instance 1
    name <text>                       optional
    note <text>                       optional, repeatable
    n <players>
    m <resources>
    capacities <m nonnegative ints>
    player <i>                        players 1..n in order
    bundle <m nonnegative ints> value <rational>
    ...
    end

Rationals are written as integers or ``p/q``; decimal notation is rejected.
"""

from __future__ import annotations

import itertools
import logging
import random
import re
from fractions import Fraction
from typing import Sequence

from .core import MarketInstance
from .errors import ValidationError

log = logging.getLogger(__name__)

SCHEMA = "walras-instance"
SCHEMA_VERSION = 1

_RATIONAL = re.compile(r"^-?\d+(/0*[1-9]\d*)?$")


def _subset(m: int, members: Sequence[int]) -> tuple[int, ...]:
    """Indicator vector of 1-based resource numbers."""
    return tuple(int(j + 1 in members) for j in range(m))


CRITICAL_PAIRS = ((1, 2), (2, 3), (1, 3))


def gen_example1(variant: str = "superset") -> MarketInstance:
    """Three players, three unit-capacity items, critical pairs {1,2}, {2,3}, {1,3}.

    ``superset``: every player owns all of {0,1}^3 and values 1 any superset of
    its pair. ``strict``: player i owns only {0, S_i} with value 1 on S_i.
    ``strict-full``: every player owns {S_1, S_2, S_3, 0, {1,2,3}} and values
    only its own pair.
    """
    caps = (1, 1, 1)
    bundles, values = [], []
    if variant == "superset":
        cube = tuple(itertools.product((0, 1), repeat=3))
        for pair in CRITICAL_PAIRS:
            bundles.append(cube)
            values.append(tuple(Fraction(int(all(b[j - 1] for j in pair))) for b in cube))
    elif variant == "strict":
        for pair in CRITICAL_PAIRS:
            bundles.append(((0, 0, 0), _subset(3, pair)))
            values.append((Fraction(0), Fraction(1)))
    elif variant == "strict-full":
        space = tuple(_subset(3, p) for p in CRITICAL_PAIRS) + ((0, 0, 0), (1, 1, 1))
        for i in range(3):
            bundles.append(space)
            values.append(tuple(Fraction(int(l == i)) for l in range(5)))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return MarketInstance(caps, tuple(bundles), tuple(values), name=f"example1-{variant}")


def gen_proposition_instance() -> MarketInstance:
    """Four players, seven unit items; the regret optimum is not welfare optimal.

    Player 1 chooses between {5,6,7} (value 3/2) and {1,2,3,4} (value 1);
    players 2, 3, 4 each want one set {1,2,5}, {1,3,6}, {1,4,7} (value 1).
    """
    m = 7
    zero = (0,) * m
    bundles = (
        (zero, _subset(m, (5, 6, 7)), _subset(m, (1, 2, 3, 4))),
        (zero, _subset(m, (1, 2, 5))),
        (zero, _subset(m, (1, 3, 6))),
        (zero, _subset(m, (1, 4, 7))),
    )
    values = (
        (Fraction(0), Fraction(3, 2), Fraction(1)),
        (Fraction(0), Fraction(1)),
        (Fraction(0), Fraction(1)),
        (Fraction(0), Fraction(1)),
    )
    return MarketInstance((1,) * m, bundles, values, name="proposition")


def gen_random(
    n: int,
    m: int,
    u_max: int,
    bundles_per_player: int,
    value_range: tuple[int, int] = (0, 4),
    seed: int = 0,
    denominator: int = 2,
) -> MarketInstance:
    """Deterministic random instance.

    Capacities are drawn from 1..u_max; each player gets the zero bundle plus
    distinct random nonzero bundles (``bundles_per_player`` in total) valued
    ``randint(*value_range) / denominator``. If the box below u is too small
    the bundle count is reduced and recorded in the instance notes.
    """
    if min(n, m, u_max, bundles_per_player, denominator) < 1:
        raise ValueError("n, m, u_max, bundles_per_player and denominator must be >= 1")
    lo, hi = value_range
    if lo > hi:
        raise ValueError("empty value range")
    rng = random.Random(seed)
    caps = tuple(rng.randint(1, u_max) for _ in range(m))
    box = 1
    for u in caps:
        box *= u + 1
    count = min(bundles_per_player, box)
    notes = []
    if count < bundles_per_player:
        log.warning("only %d distinct bundles fit below the capacities; reduced from %d", count, bundles_per_player)
        notes.append(f"bundles per player reduced from {bundles_per_player} to {count}")
    zero = (0,) * m
    bundles, values = [], []
    for _ in range(n):
        chosen = [zero]
        seen = {zero}
        while len(chosen) < count:
            b = tuple(rng.randint(0, u) for u in caps)
            if b not in seen:
                seen.add(b)
                chosen.append(b)
        bundles.append(tuple(chosen))
        values.append((Fraction(0),) + tuple(Fraction(rng.randint(lo, hi), denominator) for _ in chosen[1:]))
    name = f"random-n{n}-m{m}-u{u_max}-b{bundles_per_player}-s{seed}"
    return MarketInstance(caps, tuple(bundles), tuple(values), name=name, notes=tuple(notes))


def gen_monotone(
    n: int,
    m: int,
    u_max: int,
    bids: int = 2,
    value_range: tuple[int, int] = (1, 4),
    seed: int = 0,
    denominator: int = 2,
) -> MarketInstance:
    """Random monotone instance with upward-closed strategy spaces.

    Since the zero bundle is always present, upward closure forces every
    strategy space to be the full box {0..u_1} x ... x {0..u_m}. Valuations
    are XOR bids: a bundle is worth the best bid value it covers.
    """
    if min(n, m, u_max, bids, denominator) < 1:
        raise ValueError("n, m, u_max, bids and denominator must be >= 1")
    rng = random.Random(seed)
    caps = tuple(rng.randint(1, u_max) for _ in range(m))
    box = tuple(itertools.product(*(range(u + 1) for u in caps)))
    bundles, values = [], []
    for _ in range(n):
        wanted = []
        for _ in range(bids):
            target = tuple(rng.randint(0, u) for u in caps)
            wanted.append((target, Fraction(rng.randint(*value_range), denominator)))
        vals = []
        for b in box:
            covered = [v for t, v in wanted if all(x >= y for x, y in zip(b, t))]
            vals.append(max(covered, default=Fraction(0)) if any(b) else Fraction(0))
        bundles.append(box)
        values.append(tuple(vals))
    return MarketInstance(caps, tuple(bundles), tuple(values), name=f"monotone-n{n}-m{m}-u{u_max}-s{seed}")


def format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    if not _RATIONAL.match(text):
        raise ValidationError(f"not an exact rational: {text!r} (use an integer or p/q)", "schema")
    return Fraction(text)


def serialize(instance: MarketInstance) -> str:
    out = [f"{SCHEMA} {SCHEMA_VERSION}"]
    if instance.name:
        out.append(f"name {instance.name}")
    for note in instance.notes:
        out.append(f"note {note}")
    out.append(f"n {instance.n}")
    out.append(f"m {instance.m}")
    out.append("capacities " + " ".join(str(u) for u in instance.capacities))
    for i, (player, vals) in enumerate(zip(instance.bundles, instance.values), start=1):
        out.append(f"player {i}")
        for b, v in zip(player, vals):
            out.append("bundle " + " ".join(str(x) for x in b) + " value " + format_rational(v))
    out.append("end")
    return "\n".join(out) + "\n"


def _ints(tokens: Sequence[str], where: str) -> tuple[int, ...]:
    try:
        values = tuple(int(t) for t in tokens)
    except ValueError:
        raise ValidationError(f"{where}: expected integers, got {' '.join(tokens)!r}", "schema") from None
    return values


def parse(text: str) -> MarketInstance:
    """Parse a document; data-model violations name the offending player/bundle."""
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((number, stripped))
    if not lines:
        raise ValidationError("empty document", "schema")
    number, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != SCHEMA:
        raise ValidationError(f"line {number}: expected header '{SCHEMA} {SCHEMA_VERSION}'", "schema")
    if parts[1] != str(SCHEMA_VERSION):
        raise ValidationError(f"unsupported schema version {parts[1]}", "schema")

    name, notes = "", []
    n = m = None
    caps = None
    players: list[tuple[list, list]] = []
    ended = False
    for number, line in lines[1:]:
        if ended:
            raise ValidationError(f"line {number}: content after 'end'", "schema")
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "name":
            name = rest
        elif keyword == "note":
            notes.append(rest)
        elif keyword in ("n", "m"):
            if not rest.isdigit() or int(rest) < 1:
                raise ValidationError(f"line {number}: {keyword} must be a positive integer", "schema")
            value = int(rest)
            if keyword == "n":
                n = value
            else:
                m = value
        elif keyword == "capacities":
            caps = _ints(rest.split(), f"line {number}")
        elif keyword == "player":
            expected = len(players) + 1
            if rest != str(expected):
                raise ValidationError(f"line {number}: expected 'player {expected}'", "schema")
            players.append(([], []))
        elif keyword == "bundle":
            if not players:
                raise ValidationError(f"line {number}: bundle before any player", "schema")
            tokens = rest.split()
            if len(tokens) < 2 or tokens[-2] != "value":
                raise ValidationError(f"line {number}: expected 'bundle <ints> value <rational>'", "schema")
            b = _ints(tokens[:-2], f"line {number}")
            players[-1][0].append(b)
            players[-1][1].append(parse_rational(tokens[-1]))
        elif keyword == "end":
            ended = True
        else:
            raise ValidationError(f"line {number}: unknown keyword {keyword!r}", "schema")
    if not ended:
        raise ValidationError("missing 'end'", "schema")
    if n is None or m is None or caps is None:
        raise ValidationError("n, m and capacities are required", "schema")
    if len(caps) != m:
        raise ValidationError(f"capacities has {len(caps)} entries, expected {m}", "schema")
    if len(players) != n:
        raise ValidationError(f"document lists {len(players)} players, expected {n}", "schema")
    for i, (bundles, _) in enumerate(players, start=1):
        for l, b in enumerate(bundles, start=1):
            if len(b) != m:
                raise ValidationError(f"player {i}, bundle {l}: expected {m} entries", "schema")
    return MarketInstance(
        caps,
        tuple(tuple(b) for b, _ in players),
        tuple(tuple(v) for _, v in players),
        name=name,
        notes=tuple(notes),
    )


def read_instance(path) -> MarketInstance:
    with open(path, encoding="utf-8") as handle:
        return parse(handle.read())


def write_instance(instance: MarketInstance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(serialize(instance))
