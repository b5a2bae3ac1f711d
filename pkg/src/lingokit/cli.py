"""``lingo`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import apply_f, apply_g, check_compliance
from .errors import ConfigError, LingoError
from .params import SecretSeed, param_for
from .selftest import selftest
from .sim import Scenario, attack_table, format_table, run
from .specs import parse_lingo, parse_param, parse_value
from .transform import nonzero_scalar, theorem2_recipe, verify_malleability, xor_recipe, xor_sharp_recipe
from .values import format_value, value_to_json

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_SELFTEST = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lingo", description="Evaluate lingos and simulate dialected MQTT under attack.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def lingo_args(sp, need_op: bool):
        sp.add_argument("--spec", required=True, help='lingo spec, e.g. "dnc" or "hor(xorbseq,dnc;bias=1,5)"')
        if need_op:
            sp.add_argument("--op", choices=("f", "g", "check"), required=True)
            sp.add_argument("--d1", help="input value (decimal, w:v, [a,b] or value JSON)")
        sp.add_argument("--d2", help="output value for g or check")
        sp.add_argument("--a", help="parameter (decimal, [p,q] or parameter JSON)")
        sp.add_argument("--n", type=int, help="derive the parameter from --seed and message number n")
        sp.add_argument("--seed", help="hex seed, at least 128 bits")
        sp.add_argument("--route", default="A,B", help="sender,receiver for authenticating lingos")
        sp.add_argument("--json", action="store_true", help="print wire JSON instead of shorthand")

    lingo_args(sub.add_parser("eval", help="apply f, g or the compliance check"), True)
    lingo_args(sub.add_parser("check", help="compliance check of --d2 under a parameter"), False)

    m = sub.add_parser("malleability", help="empirically verify a malleability recipe")
    m.add_argument("--spec", required=True)
    m.add_argument("--recipe", choices=("xor", "xorsharp", "theorem2"), required=True)
    m.add_argument("--samples", type=int, default=10_000)
    m.add_argument("--seed", default="00", help="hex natural seeding the sample stream")

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("--scenario", required=True)
    r.add_argument("--out", help="report JSON path (stdout when absent)")
    r.add_argument("--trace", help="directory for per-trial JSON-lines traces")
    r.add_argument("--trials", type=int, help="override the scenario's trial count")

    t = sub.add_parser("table", help="attack-rate table over a directory of scenarios")
    t.add_argument("--scenario", required=True, help="directory of scenario JSON files (or one file)")
    t.add_argument("--out", help="rows as JSON")
    t.add_argument("--trials", type=int, help="override every scenario's trial count")

    s = sub.add_parser("selftest", help="run the built-in invariant sweep")
    s.add_argument("--samples", type=int, default=200)
    return p


def _hex_int(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError as exc:
        raise ConfigError(f"--seed must be hex, got {text!r}") from exc


def _param(args, lingo):
    if args.a is not None:
        return parse_param(args.a)
    if args.n is None or args.seed is None:
        raise ConfigError("give --a, or --n together with --seed")
    route = tuple(x.strip() for x in args.route.split(","))
    if len(route) != 2:
        raise ConfigError("--route must be sender,receiver")
    return param_for(lingo, SecretSeed.from_hex(args.seed), args.n, route)


def _show(v, as_json: bool) -> str:
    return json.dumps(value_to_json(v), sort_keys=True) if as_json else format_value(v)


def _eval(args, op: str) -> int:
    lingo = parse_lingo(args.spec)
    a = _param(args, lingo)
    if op == "f":
        if args.d1 is None:
            raise ConfigError("--op f needs --d1")
        print(_show(apply_f(lingo, parse_value(args.d1, lingo.d1), a), args.json))
        return EXIT_OK
    if args.d2 is None:
        raise ConfigError(f"--op {op} needs --d2")
    d2 = parse_value(args.d2, lingo.d2)
    if op == "g":
        print(_show(apply_g(lingo, d2, a), args.json))
    else:
        print("true" if check_compliance(lingo, d2, a) else "false")
    return EXIT_OK


def _malleability(args) -> int:
    lingo = parse_lingo(args.spec)
    if args.recipe == "xor":
        if lingo.rule != "xor":
            raise ConfigError("the xor recipe targets xor:N lingos")
        recipe = xor_recipe(lingo.options["width"])
    elif args.recipe == "xorsharp":
        base = lingo.parts[0] if lingo.rule == "sharp" else None
        if base is None or base.rule != "xor":
            raise ConfigError("the xorsharp recipe targets sharp(xor:N)")
        recipe = xor_sharp_recipe(base.options["width"])
    else:
        recipe = theorem2_recipe(lingo, nonzero_scalar)
    report = verify_malleability(lingo, recipe, args.samples, _hex_int(args.seed))
    print(json.dumps(report.to_json(), sort_keys=True))
    return EXIT_OK


def _with_trials(s: Scenario, trials: int | None) -> Scenario:
    if trials is None:
        return s
    return Scenario(s.seed, s.lingo_spec, s.actors, s.attacker, trials, s.max_steps, s.payload)


def _run(args) -> int:
    s = _with_trials(Scenario.load(args.scenario), args.trials)
    text = run(s, args.trace).dumps()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _table(args) -> int:
    path = Path(args.scenario)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    if not files:
        raise ConfigError(f"no scenario files under {path}")
    rows = attack_table([_with_trials(Scenario.load(f), args.trials) for f in files])
    if args.out:
        Path(args.out).write_text(json.dumps(rows, sort_keys=True, indent=2) + "\n")
    sys.stdout.write(format_table(rows))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.cmd == "eval":
            return _eval(args, args.op)
        if args.cmd == "check":
            return _eval(args, "check")
        if args.cmd == "malleability":
            return _malleability(args)
        if args.cmd == "run":
            return _run(args)
        if args.cmd == "table":
            return _table(args)
        return EXIT_OK if selftest(args.samples) else EXIT_SELFTEST
    except LingoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
