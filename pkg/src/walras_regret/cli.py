"""Command-line front end.

Every command prints a human-readable table, or with ``--json`` a
machine-readable report in which every rational is a ``p/q`` string.

Exit codes: 0 success, 1 validation error, 2 size cap exceeded,
3 a certified bound failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import algos, flow, instances, regret as regretmod, welfare
from .core import MarketInstance, check_monotone_upward_closed
from .errors import BoundViolationError, CapExceededError, MarketError

REPORT_SCHEMA = "walras-report/1"

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_BOUND = 0, 1, 2, 3


def _q(value: Fraction) -> str:
    return instances.format_rational(Fraction(value))


def _digest(instance: MarketInstance) -> dict:
    return {"name": instance.name, "n": instance.n, "m": instance.m, "k": instance.k, "u_max": instance.u_max}


def _prices(values) -> list[str]:
    return [_q(v) for v in values]


def _checks(bounds) -> list[dict]:
    return [
        {"name": b.name, "lhs": _q(b.lhs), "relation": b.relation, "rhs": _q(b.rhs), "holds": b.holds}
        for b in bounds
    ]


def _parse_allocation(text: str) -> tuple[int, ...]:
    parts = text.replace(",", " ").split()
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"allocation must be bundle indices, got {text!r}") from None


def cmd_check(instance: MarketInstance, args) -> dict:
    report = check_monotone_upward_closed(instance)
    return {
        "valid": True,
        "monotone_upward_closed": report.monotone and report.upward_closed,
        "monotone_valuations": report.monotone,
        "upward_closed": report.upward_closed,
        "monotone_witness": _witness(report.monotone_witness),
        "upward_witness": _witness(report.upward_witness),
        "profiles": instance.profile_count,
    }


def _witness(w):
    if w is None:
        return None
    player, x, y = w
    return {"player": player + 1, "x": list(x), "y": list(y)}


def cmd_welfare(instance: MarketInstance, args) -> dict:
    profile = algos.ALGORITHMS[args.alg](instance)
    value = welfare.welfare_value(instance, profile)
    return {
        "algorithm": args.alg,
        "profile": list(profile),
        "value": _q(value),
        "lp_optimum": _q(welfare.lp_optimum(instance)),
        "iota": _q(welfare.integrality_gap(instance, profile)),
    }


def cmd_min_regret(instance: MarketInstance, args) -> tuple[dict, list]:
    res = regretmod.min_regret_exact(instance, restrict_full_load=args.restrict_full_load)
    opt = welfare.solve_welfare_exact(instance)
    cert = regretmod.certify(instance, res.profile, res.prices)
    welfare_here = welfare.welfare_value(instance, res.profile)
    results = {
        "regret": _q(res.regret),
        "profile": list(res.profile),
        "prices": _prices(res.prices),
        "welfare": _q(welfare_here),
        "welfare_optimum": _q(opt.value),
        "welfare_optimal": welfare_here == opt.value,
        "restrict_full_load": args.restrict_full_load,
        "gamma": _q(cert.gamma),
        "iota": _q(cert.iota),
        "beta": _q(cert.beta),
        "iota_lift": _q(cert.iota_lift),
    }
    return results, list(cert.bounds_checked)


def cmd_price(instance: MarketInstance, args) -> tuple[dict, list]:
    profile = args.allocation
    res = regretmod.optimal_prices_for(instance, profile)
    cert = regretmod.certify(instance, profile, res.lam)
    results = {
        "profile": list(profile),
        "prices": _prices(res.lam),
        "delta": _q(res.delta),
        "per_player_delta": _prices(res.per_player_delta),
        "beta": _q(cert.beta),
        "iota": _q(cert.iota),
        "iota_lift": _q(cert.iota_lift),
        "gamma": _q(cert.gamma),
    }
    return results, list(cert.bounds_checked)


def cmd_run_alg(instance: MarketInstance, args) -> tuple[dict, list]:
    run = algos.algorithm3 if args.which == 3 else algos.algorithm4
    out = run(instance, args.alg)
    checks = [regretmod.BoundCheck("regret <= guaranteed bound", out.regret, "<=", out.bound)]
    if out.gamma_bound is not None:
        checks.append(regretmod.BoundCheck("regret <= duality-gap bound", out.regret, "<=", out.gamma_bound))
    results = {
        "algorithm": args.which,
        "welfare_alg": args.alg,
        "source_profile": list(out.source_profile),
        "profile": list(out.profile),
        "prices": _prices(out.prices),
        "regret": _q(out.regret),
        "alpha": _q(out.alpha),
        "bound": _q(out.bound),
        "bound_holds": out.bound_holds,
        "gamma_bound": None if out.gamma_bound is None else _q(out.gamma_bound),
    }
    return results, checks


def generate(args) -> MarketInstance:
    kind = args.kind
    if kind == "example1":
        return instances.gen_example1("superset")
    if kind == "example1-strict":
        return instances.gen_example1("strict")
    if kind == "example1-strict-full":
        return instances.gen_example1("strict-full")
    if kind == "prop":
        return instances.gen_proposition_instance()
    if kind == "random":
        return instances.gen_random(
            args.n, args.m, args.u_max, args.bundles, (args.value_min, args.value_max), args.seed, args.denominator
        )
    if kind == "monotone":
        return instances.gen_monotone(
            args.n, args.m, args.u_max, args.bids, (args.value_min, args.value_max), args.seed, args.denominator
        )
    if kind == "flow":
        return flow.gen_flow_market(flow.flow_gadget(args.gadget), name=f"flow-{args.gadget}")
    raise ValueError(kind)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walras-regret", description="Exact minimal-regret Walras equilibria.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a machine-readable report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate an instance file")
    p.add_argument("file")

    p = sub.add_parser("welfare", parents=[common], help="maximize welfare")
    p.add_argument("file")
    p.add_argument("--alg", choices=sorted(algos.ALGORITHMS), default="exact")

    p = sub.add_parser("min-regret", parents=[common], help="globally minimal regret")
    p.add_argument("file")
    p.add_argument("--restrict-full-load", action="store_true", help="only profiles whose load equals u")

    p = sub.add_parser("price", parents=[common], help="optimal prices for a fixed allocation")
    p.add_argument("file")
    p.add_argument("--allocation", required=True, type=_parse_allocation, help="bundle indices, e.g. 1,0,0")

    p = sub.add_parser("run-alg", parents=[common], help="run algorithm 3 (monotone) or 4 (general)")
    p.add_argument("which", type=int, choices=(3, 4))
    p.add_argument("file")
    p.add_argument("--alg", choices=sorted(algos.ALGORITHMS), default="exact")

    p = sub.add_parser("gen", help="write a generated instance")
    p.add_argument(
        "kind", choices=("example1", "example1-strict", "example1-strict-full", "prop", "random", "monotone", "flow")
    )
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--u-max", type=int, default=1)
    p.add_argument("--bundles", type=int, default=3)
    p.add_argument("--bids", type=int, default=2)
    p.add_argument("--value-min", type=int, default=0)
    p.add_argument("--value-max", type=int, default=4)
    p.add_argument("--denominator", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gadget", choices=flow.FLOW_GADGETS, default="single-arc")
    return parser


COMMANDS = {
    "check": cmd_check,
    "welfare": cmd_welfare,
    "min-regret": cmd_min_regret,
    "price": cmd_price,
    "run-alg": cmd_run_alg,
}


def _render_human(command: str, digest: dict, results: dict, checks: list) -> str:
    lines = [f"{command}: {digest['name'] or '(unnamed)'}  n={digest['n']} m={digest['m']} k={digest['k']} u_max={digest['u_max']}"]
    width = max((len(k) for k in results), default=0)
    for key, value in results.items():
        if isinstance(value, list):
            value = "(" + ", ".join(str(v) for v in value) + ")"
        elif isinstance(value, dict):
            value = ", ".join(f"{k}={v}" for k, v in value.items())
        lines.append(f"  {key.ljust(width)}  {value}")
    if checks:
        lines.append("  bounds:")
        for c in checks:
            mark = "ok" if c["holds"] else "FAILED"
            lines.append(f"    [{mark}] {c['name']}: {c['lhs']} {c['relation']} {c['rhs']}")
    return "\n".join(lines)


def _fail(message: str, code: str, status: int, as_json: bool, argv) -> int:
    if as_json:
        print(json.dumps({"schema": REPORT_SCHEMA, "command": list(argv), "error": {"code": code, "message": message}, "status": status}))
    print(f"error [{code}]: {message}", file=sys.stderr)
    return status


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    as_json = getattr(args, "json", False)
    try:
        if args.command == "gen":
            text = instances.serialize(generate(args))
            if args.output:
                with open(args.output, "w", encoding="utf-8", newline="\n") as handle:
                    handle.write(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        instance = instances.read_instance(args.file)
        out = COMMANDS[args.command](instance, args)
        results, bounds = out if isinstance(out, tuple) else (out, [])
    except BoundViolationError as exc:
        return _fail(str(exc), "bound-violation", EXIT_BOUND, as_json, argv)
    except CapExceededError as exc:
        return _fail(str(exc), "cap-exceeded", EXIT_CAP, as_json, argv)
    except MarketError as exc:
        return _fail(str(exc), exc.code or "invalid", EXIT_INVALID, as_json, argv)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), "invalid", EXIT_INVALID, as_json, argv)
    checks = _checks(bounds)
    status = EXIT_OK if all(c["holds"] for c in checks) else EXIT_BOUND
    digest = _digest(instance)
    if as_json:
        report = {
            "schema": REPORT_SCHEMA,
            "command": argv,
            "instance": digest,
            "results": results,
            "certificate": checks,
            "status": status,
        }
        print(json.dumps(report, indent=2))
    else:
        print(_render_human(args.command, digest, results, checks))
    return status


if __name__ == "__main__":
    sys.exit(main())
