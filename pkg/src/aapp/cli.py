"""Command-line front end.

Exit codes: 0 query holds / command succeeded, 1 query does not hold,
2 search bound exhausted, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path
from typing import Optional

import yaml

from .analysis import BoundExhausted, DoesNotHold, Holds, classify, cooccur, goal_search, reach
from .encoder import encode, format_policy, has_errors, validate
from .errors import AappError
from .model import STAR, Configuration, GoalSpec, trace_from_records, trace_to_records
from .parser import format_script, parse_config, parse_goal_file, parse_script
from .pddl import RawGoal, emit_domain, emit_problem
from .semantics import Chosen, replay, schedule

EXIT_HOLDS, EXIT_NOT_HOLDS, EXIT_BOUND, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(args):
    ast = parse_script(_read(args.script))
    diags = []
    policy = encode(ast, diags)
    C, reg = parse_config(_read(args.config))
    diags += validate(policy, reg, C)
    for d in diags:
        print(str(d), file=sys.stderr)
    if has_errors(diags):
        raise UsageError("script does not validate against the configuration")
    return policy, C, reg


def _config_record(C: Configuration) -> dict:
    return {
        w: {"allocated": dict(s.allocated), "used": s.used, "max": s.max}
        for w, s in C.items()
    }


def _config_text(C: Configuration) -> str:
    lines = []
    for w, s in C.items():
        fs = ", ".join(f for f, n in s.allocated for _ in range(n))
        lines.append(f"{w}: {{{fs}}} used {s.used}/{s.max}")
    return "\n".join(lines)


def _max_states(args) -> Optional[int]:
    if args.max_states is not None:
        return args.max_states
    env = os.environ.get("AAPP_MAX_STATES")
    if env:
        if not env.isdigit():
            raise UsageError(f"AAPP_MAX_STATES must be a natural number, got {env!r}")
        return int(env)
    return None


def _report_decision(args, query: dict, decision, stats) -> int:
    if isinstance(decision, Holds):
        code = EXIT_HOLDS
    elif isinstance(decision, DoesNotHold):
        code = EXIT_NOT_HOLDS
    else:
        code = EXIT_BOUND
    witness = decision.witness if isinstance(decision, Holds) else None
    if args.format == "json":
        payload = {
            "query": query,
            "decision": decision.verdict,
            "witness": trace_to_records(witness) if witness is not None else None,
            "stats": {
                "states_visited": stats.states_visited,
                "frontier_peak": stats.frontier_peak,
                "witness_length": stats.witness_length,
                "backend": stats.backend,
            },
        }
        if isinstance(decision, Holds) and decision.note:
            payload["note"] = decision.note
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(decision.verdict)
        if isinstance(decision, Holds) and decision.note:
            print(f"note: {decision.note}")
        if witness is not None:
            for label in witness:
                print(f"  {label}")
        if isinstance(decision, BoundExhausted):
            print(f"states visited: {decision.states_visited}")
    return code


# --------------------------------------------------------------------------- subcommands


def cmd_parse(args) -> int:
    ast = parse_script(_read(args.script))
    if args.format == "json":
        print(json.dumps(_ast_record(ast), indent=2))
    else:
        print(format_script(ast), end="")
    return EXIT_HOLDS


def _block_workers(ws):
    return "*" if ws is STAR else list(ws)


def _ast_record(ast) -> list:
    out = []
    for t in ast.tags:
        blocks = []
        for b in t.blocks:
            blocks.append(
                {
                    "workers": _block_workers(b.workers),
                    "strategy": b.strategy.value if b.strategy else None,
                    "invalidate": [str(o) for o in b.invalidate] if b.invalidate is not None else None,
                    "affinity": [str(o) for o in b.affinity] if b.affinity is not None else None,
                }
            )
        out.append({"tag": t.name, "blocks": blocks, "followup": t.followup})
    return out


def cmd_encode(args) -> int:
    diags = []
    policy = encode(parse_script(_read(args.script)), diags)
    for d in diags:
        print(str(d), file=sys.stderr)
    if args.format == "json":
        record = {
            tag: [
                {
                    "workers": _block_workers(b.workers),
                    "strategy": b.strategy.value,
                    "invalidate": [str(o) for o in b.invalidate],
                    "affine": list(b.affine),
                    "anti_affine": list(b.anti_affine),
                }
                for b in blocks
            ]
            for tag, blocks in policy.items()
        }
        print(json.dumps(record, indent=2))
    else:
        print(format_policy(policy), end="")
    return EXIT_HOLDS


def cmd_classify(args) -> int:
    pol = classify(encode(parse_script(_read(args.script))))
    print(json.dumps({"polarity": str(pol)}) if args.format == "json" else str(pol))
    return EXIT_HOLDS


def cmd_schedule(args) -> int:
    policy, C, reg = _load(args)
    if args.function not in reg:
        raise UsageError(f"unknown function {args.function}")
    outcome = schedule(args.function, C, policy, reg, random.Random(args.seed))
    if isinstance(outcome, Chosen):
        text, rec = outcome.worker, {"worker": outcome.worker, "block": outcome.block_index}
    else:
        text, rec = "FAIL", {"worker": None, "block": None}
    print(json.dumps(rec) if args.format == "json" else text)
    return EXIT_HOLDS


def cmd_simulate(args) -> int:
    policy, C, reg = _load(args)
    try:
        raw = yaml.safe_load(_read(args.trace))
    except yaml.YAMLError as exc:
        raise UsageError(f"cannot parse trace file: {exc}") from None
    if isinstance(raw, dict) and "witness" in raw:
        raw = raw["witness"]
    if not isinstance(raw, list):
        raise UsageError("trace file must hold a list of {action, function, worker} records")
    try:
        trace = trace_from_records(raw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    final = replay(C, trace, policy, reg, strict=not args.lenient)
    if args.format == "json":
        print(json.dumps({"configuration": _config_record(final)}, indent=2, sort_keys=True))
    else:
        print(_config_text(final))
    return EXIT_HOLDS


def _check_names(reg, C, functions, worker):
    for f in functions:
        if f not in reg:
            raise UsageError(f"unknown function {f}")
    if worker not in C:
        raise UsageError(f"unknown worker {worker}")


def cmd_reach(args) -> int:
    policy, C, reg = _load(args)
    _check_names(reg, C, [args.function], args.worker)
    decision, stats = reach(policy, reg, C, args.function, args.worker, _max_states(args), witness=True)
    return _report_decision(args, {"kind": "reach", "function": args.function, "worker": args.worker}, decision, stats)


def cmd_cooccur(args) -> int:
    policy, C, reg = _load(args)
    fs = [f.strip() for f in args.functions.split(",")]
    if len(fs) != 2 or not all(fs):
        raise UsageError("--functions expects exactly two names, F,G")
    _check_names(reg, C, fs, args.worker)
    decision, stats = cooccur(policy, reg, C, fs[0], fs[1], args.worker, _max_states(args), witness=True)
    query = {"kind": "cooccur", "functions": fs, "worker": args.worker}
    return _report_decision(args, query, decision, stats)


def cmd_check(args) -> int:
    policy, C, reg = _load(args)
    try:
        goal = GoalSpec.parse(args.goal)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for w, f, _ in goal.constraints:
        _check_names(reg, C, [f], w)
    decision, stats = goal_search(policy, reg, C, goal, _max_states(args), exact=args.exact)
    query = {"kind": "goal", "constraints": [list(c) for c in goal.constraints], "exact": args.exact}
    return _report_decision(args, query, decision, stats)


def cmd_emit_pddl(args) -> int:
    policy, C, reg = _load(args)
    if args.reach:
        parts = args.reach.split(":")
        if len(parts) != 2:
            raise UsageError("--reach expects F:W")
        _check_names(reg, C, [parts[0]], parts[1])
        query = GoalSpec.reach(parts[0], parts[1])
    elif args.cooccur:
        parts = args.cooccur.split(":")
        if len(parts) != 3:
            raise UsageError("--cooccur expects F:G:W")
        _check_names(reg, C, parts[:2], parts[2])
        query = GoalSpec.cooccur(parts[0], parts[1], parts[2])
    else:
        text = _read(args.goal_file)
        if text.lstrip().startswith("("):
            query = RawGoal(text)
        else:
            query = parse_goal_file(text)
            for w, f, _ in query.constraints:
                _check_names(reg, C, [f], w)
    domain = emit_domain(policy, reg, C)
    problem = emit_problem(C, reg, query, policy=policy, at_least=args.goal_at_least)
    dpath = Path(f"{args.out_prefix}-domain.pddl")
    ppath = Path(f"{args.out_prefix}-problem.pddl")
    try:
        dpath.write_text(domain, encoding="utf-8")
        ppath.write_text(problem, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc.strerror}") from None
    if args.format == "json":
        print(json.dumps({"domain": str(dpath), "problem": str(ppath)}))
    else:
        print(dpath)
        print(ppath)
    return EXIT_HOLDS


# --------------------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aapp", description="Verify aAPP serverless scheduling scripts.")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def script_only(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("script")
        p.set_defaults(func=func)
        return p

    def with_inputs(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--script", required=True)
        p.add_argument("--config", required=True)
        p.set_defaults(func=func)
        return p

    def search_opts(p):
        p.add_argument("--max-states", type=int, default=None)
        p.add_argument("--deterministic", action="store_true", help="always on; accepted for compatibility")
        p.add_argument("--threads", type=int, default=1, help="search runs single-threaded; accepted for compatibility")

    script_only("parse", cmd_parse, "dump the parsed script")
    script_only("encode", cmd_encode, "dump the encoded policy")
    script_only("classify", cmd_classify, "print the polarity fragment")

    p = with_inputs("schedule", cmd_schedule, "schedule one function on the initial configuration")
    p.add_argument("--function", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = with_inputs("simulate", cmd_simulate, "replay a trace and print the final configuration")
    p.add_argument("--trace", required=True)
    p.add_argument("--lenient", action="store_true", help="only enforce capacity on start labels")

    p = with_inputs("reach", cmd_reach, "can FUNCTION ever run on WORKER")
    p.add_argument("--function", required=True)
    p.add_argument("--worker", required=True)
    search_opts(p)

    p = with_inputs("cooccur", cmd_cooccur, "can F and G ever run together on WORKER")
    p.add_argument("--functions", required=True)
    p.add_argument("--worker", required=True)
    search_opts(p)

    p = with_inputs("check", cmd_check, "search for a configuration meeting worker:function:count goals")
    p.add_argument("--goal", required=True)
    p.add_argument("--exact", action="store_true", help="counts must match exactly")
    search_opts(p)

    p = with_inputs("emit-pddl", cmd_emit_pddl, "write PDDL domain and problem files")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--reach", metavar="F:W")
    group.add_argument("--cooccur", metavar="F:G:W")
    group.add_argument("--goal-file", metavar="G")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--goal-at-least", action="store_true", help="emit >= goals instead of =")
    return parser


def _hoist_format(argv: list[str]) -> list[str]:
    # allow --format after the subcommand as well as before it
    out, rest, i = [], [], 0
    while i < len(argv):
        a = argv[i]
        if a == "--format" and i + 1 < len(argv):
            out += [a, argv[i + 1]]
            i += 2
            continue
        if a.startswith("--format="):
            out.append(a)
        else:
            rest.append(a)
        i += 1
    return out + rest


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_hoist_format(argv))
        return args.func(args)
    except (UsageError, AappError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
