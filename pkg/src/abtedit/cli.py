"""Batch entry point.

    abt-edit run --spec letlang.edspec --init-sort e -e "{plus}.nil"
    abt-edit query --spec letlang.edspec --tree prog.abt "@hole_e"
    abt-edit check-soundness --spec letlang.edspec --root-sort s --cases 500

Exit codes for `run`: 0 terminal, 2 stuck, 3 fuel exhausted, 1 usage or
parse errors.  `check-soundness` exits 2 iff any case mismatches.
Identical inputs (including --seed) produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .abt import AbtError, check_well_formed, initial_tree, parse_tree, print_tree
from .engine import (
    FUEL_EXHAUSTED,
    STUCK,
    TERMINAL,
    Config,
    ScriptParseError,
    parse_editor_expr,
    run,
)
from .encoding import run_soundness_suite
from .langspec import SpecError, editor_extend, load_spec
from .logic import ConditionParseError, parse_condition, satisfies
from .wire import tree_to_wire


class CliError(Exception):
    pass


def _load_spec(path: str):
    try:
        return editor_extend(load_spec(Path(path).read_text()))
    except FileNotFoundError:
        raise CliError(f"spec file not found: {path}")
    except SpecError as err:
        raise CliError(f"bad language spec: {err}")


def _load_tree(args, spec):
    if args.tree is not None:
        try:
            raw = parse_tree(Path(args.tree).read_text(), spec)
            return check_well_formed(raw, spec)
        except FileNotFoundError:
            raise CliError(f"tree file not found: {args.tree}")
        except AbtError as err:
            raise CliError(f"bad tree: {err}")
    try:
        return initial_tree(spec, spec.sort(args.init_sort))
    except SpecError as err:
        raise CliError(str(err))


def _load_script(args) -> str:
    if args.expr is not None:
        return args.expr
    try:
        return Path(args.script).read_text()
    except FileNotFoundError:
        raise CliError(f"script file not found: {args.script}")


def cmd_run(args) -> int:
    spec = _load_spec(args.spec)
    tree = _load_tree(args, spec)
    try:
        expr = parse_editor_expr(_load_script(args))
    except ScriptParseError as err:
        raise CliError(f"script parse error: {err}")
    result = run(Config(expr, tree), spec, args.fuel)

    if args.output == "tree":
        print(print_tree(result.final_tree.tree))
        if result.status == STUCK:
            print(f"stuck: {result.stuck_reason}", file=sys.stderr)
    elif args.output == "trace":
        for label, snapshot in result.trace:
            print(f"{label}\t{print_tree(snapshot.tree)}")
        print(f"-- {result.status} in {result.steps} steps")
        print(print_tree(result.final_tree.tree))
    else:
        payload = {
            "status": result.status,
            "steps": result.steps,
            "stuckReason": result.stuck_reason,
            "finalSexpr": print_tree(result.final_tree.tree),
            "finalTree": tree_to_wire(result.final_tree, spec),
            "trace": [
                {"label": str(label), "sexpr": print_tree(t.tree)}
                for label, t in result.trace
            ],
        }
        print(json.dumps(payload, indent=2, sort_keys=True))

    return {TERMINAL: 0, STUCK: 2, FUEL_EXHAUSTED: 3}[result.status]


def cmd_query(args) -> int:
    spec = _load_spec(args.spec)
    tree = _load_tree(args, spec)
    try:
        phi = parse_condition(args.condition)
    except ConditionParseError as err:
        raise CliError(f"condition parse error: {err}")
    try:
        value = satisfies(tree.enclosed(), phi, spec)
    except SpecError as err:
        raise CliError(str(err))
    print("true" if value else "false")
    return 0


def cmd_check_soundness(args) -> int:
    spec = _load_spec(args.spec)
    try:
        root = spec.sort(args.root_sort)
    except SpecError as err:
        raise CliError(str(err))
    report = run_soundness_suite(
        spec,
        root,
        cases=args.cases,
        seed=args.seed,
        fuel=args.fuel,
        mutate=args.mutate_encoding,
    )
    machine_summary = json.dumps(
        {
            "cases": len(report.cases),
            "seed": report.seed,
            "match": report.counts["MATCH"],
            "stuckAgree": report.counts["STUCK-AGREE"],
            "fuel": report.counts["FUEL"],
            "mismatch": report.counts["MISMATCH"],
        },
        sort_keys=True,
    )
    lines = [case.line() for case in report.cases]
    body = "\n".join(lines + [report.summary(), machine_summary]) + "\n"
    if args.report is not None:
        Path(args.report).write_text(body)
    if not args.quiet:
        sys.stdout.write(body)
    else:
        print(report.summary())
    return 0 if report.ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abt-edit",
        description="Syntax-directed editing over any abstract syntax.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_tree_source(p):
        p.add_argument("--spec", required=True, help="language spec document")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--tree", help="s-expression tree file (one cursor)")
        src.add_argument(
            "--init-sort",
            help="start from a cursor over a hole of this sort",
        )

    p_run = sub.add_parser("run", help="run an editor script over a tree")
    add_tree_source(p_run)
    script_src = p_run.add_mutually_exclusive_group(required=True)
    script_src.add_argument("-e", "--expr", help="inline script text")
    script_src.add_argument("--script", help="script file")
    p_run.add_argument("--fuel", type=int, default=10_000)
    p_run.add_argument(
        "--output", choices=("tree", "trace", "json"), default="tree"
    )
    p_run.set_defaults(fn=cmd_run)

    p_query = sub.add_parser("query", help="evaluate a condition at the cursor")
    add_tree_source(p_query)
    p_query.add_argument("condition", help="condition text, e.g. '@hole_e'")
    p_query.set_defaults(fn=cmd_query)

    p_check = sub.add_parser(
        "check-soundness",
        help="compare direct runs against encoded lambda evaluation",
    )
    p_check.add_argument("--spec", required=True)
    p_check.add_argument("--root-sort", required=True)
    p_check.add_argument("--cases", type=int, default=500)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--fuel", type=int, default=1000)
    p_check.add_argument("--report", help="write the per-case report here")
    p_check.add_argument("--quiet", action="store_true", help="summary only")
    p_check.add_argument(
        "--mutate-encoding",
        action="store_true",
        help=argparse.SUPPRESS,  # test-only canary
    )
    p_check.set_defaults(fn=cmd_check_soundness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 1 if err.code not in (0, None) else 0
    if getattr(args, "fuel", 0) < 0:
        print("fuel must be >= 0", file=sys.stderr)
        return 1
    try:
        return args.fn(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
