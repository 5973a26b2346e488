"""Command-line front end.

Exit codes: 0 success, 1 parse error, 2 budget exceeded, 3 domain error,
4 I/O error, 5 a verification command found a failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .core import BudgetExceeded, ExprForest, node_count
from .equivalence import randomized_equivalence_suite
from .evaluator import DomainError, UnboundVariable, check_gradient, evaluate
from .forward import forward_derivative
from .parser import ParseError, parse_expr, parse_program
from .printing import dag_text, export_dot, forest_text, to_text
from .symbolic import DiffPolicy, symbolic_derivative
from .tracer import StepLimitExceeded, trace_derivative, trace_program
from .transforms import DEFAULT_BUDGET, to_forest, unfold

EXIT_PARSE, EXIT_BUDGET, EXIT_DOMAIN, EXIT_IO, EXIT_FAILED = 1, 2, 3, 4, 5


def _read_source(arg: str) -> str:
    if arg.endswith((".expr", ".prog")) or (os.path.sep in arg and os.path.exists(arg)):
        with open(arg) as fh:
            return fh.read()
    return arg


def _inputs(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        name, sep, value = pair.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected name=value, got {pair!r}")
        out[name.strip()] = float(value)
    return out


def _emit(args, data: dict, text: Optional[str] = None) -> None:
    if args.json or text is None:
        print(json.dumps(data, indent=2, sort_keys=False))
    else:
        print(text)


def _render(output, root) -> str:
    if isinstance(output, ExprForest):
        return forest_text(output)
    return dag_text(output, root)


def cmd_parse(args) -> int:
    store, root = parse_expr(_read_source(args.expr))
    _emit(args, {"text": to_text(store, root), "nodes": node_count(store, root),
                 "variables": store.free_vars(root)}, to_text(store, root))
    return 0


def cmd_diff(args) -> int:
    store, root = parse_expr(_read_source(args.expr))
    wrt = args.wrt or (store.free_vars(root) or ["x"])[0]
    stats: dict = {"wrt": wrt, "mode": args.mode, "input_nodes": node_count(store, root)}
    if args.mode == "forward":
        d, table = forward_derivative(store, root, wrt, args.simplify)
        output, log = table.store, table.log
    else:
        res = symbolic_derivative(store, root, wrt, DiffPolicy(args.policy, args.memoize),
                                  args.simplify, args.budget)
        d, output, log = res
        stats.update(policy=args.policy, memoize=args.memoize)
    text = _render(output, d)
    stats["derivative_nodes"] = node_count(output) if isinstance(output, ExprForest) else node_count(output, d)
    stats["ops"] = log.to_dict()
    if args.dot:
        export_dot(output, d, args.dot)
    if args.json:
        _emit(args, {"derivative": text, **stats})
    else:
        print(text)
        if args.stats:
            print(json.dumps(stats, indent=2))
    return 0


def cmd_eval(args) -> int:
    store, root = parse_expr(_read_source(args.expr))
    value = evaluate(store, root, _inputs(args.input))
    _emit(args, {"value": value}, repr(value))
    return 0


def cmd_check(args) -> int:
    store, root = parse_expr(_read_source(args.expr))
    names = [args.wrt] if args.wrt else store.free_vars(root)
    report = check_gradient(store, root, names, _inputs(args.input), args.tol, budget=args.budget)
    print(json.dumps(report.to_dict(), indent=2))
    if any(v.error and "DomainError" in v.error for v in report.variables):
        return EXIT_DOMAIN
    return 0 if report.ok else EXIT_FAILED


def cmd_check_equiv(args) -> int:
    summary = randomized_equivalence_suite(args.seed, args.cases, args.max_nodes)
    print(json.dumps(summary.to_dict(), indent=2))
    ok = not summary.failures and summary.negative_control["detected"]
    return 0 if ok else EXIT_FAILED


def cmd_unfold(args) -> int:
    store, root = parse_expr(_read_source(args.expr))
    tree, troot = unfold(store, root, args.budget)
    _emit(args, {"tree": to_text(tree, troot), "dag_nodes": node_count(store, root),
                 "tree_nodes": node_count(tree, troot)}, to_text(tree, troot))
    return 0


def cmd_to_forest(args) -> int:
    store, root = parse_expr(_read_source(args.expr))
    forest = to_forest(store, root)
    _emit(args, {"forest": forest_text(forest), "bindings": [b.name for b in forest.bindings],
                 "forest_nodes": node_count(forest)}, forest_text(forest))
    return 0


def cmd_trace(args) -> int:
    program = parse_program(_read_source(args.program))
    inputs = _inputs(args.input)
    trace = trace_program(program, inputs)
    data = {
        "params": program.params,
        "trace": dag_text(trace.dag, trace.root),
        "trace_nodes": node_count(trace.dag, trace.root),
        "branch_decisions": [{"statement": s, "taken": t} for s, t in trace.branch_decisions],
        "value": evaluate(trace.dag, trace.root, trace.inputs),
    }
    if args.wrt:
        value, deriv = trace_derivative(program, inputs, args.wrt, args.mode, args.policy, args.simplify)
        data["derivative"] = deriv
    if args.dot:
        export_dot(trace.dag, trace.root, args.dot)
    print(json.dumps(data, indent=2))
    return 0


def cmd_bench(args) -> int:
    from . import bench

    if args.which == "speelpenning":
        data = bench.bench_speelpenning(args.n, args.seed)
    elif args.which == "swell":
        data = bench.bench_swell(args.k_max, args.budget)
    else:
        data = bench.bench_size_scaling(args.seed, samples=args.samples)
    print(json.dumps(data, indent=2))
    return 0


def cmd_export(args) -> int:
    store, root = parse_expr(_read_source(args.expr))
    target = to_forest(store, root) if args.forest else store
    export_dot(target, root, args.dot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max nodes for unfolding/copying")

    diff_flags = argparse.ArgumentParser(add_help=False)
    diff_flags.add_argument("--wrt", help="differentiation variable (default: first variable)")
    diff_flags.add_argument("--mode", choices=("forward", "symbolic"), default="forward")
    diff_flags.add_argument("--policy", choices=("copy", "share", "cse"), default="share")
    diff_flags.add_argument("--memoize", action=argparse.BooleanOptionalAction, default=False)
    diff_flags.add_argument("--simplify", action="store_true")

    ap = argparse.ArgumentParser(prog="exprdiff", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common])
    p.add_argument("expr")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("diff", parents=[common, diff_flags])
    p.add_argument("expr")
    p.add_argument("--dot", help="write the derivative graph as DOT")
    p.add_argument("--stats", action="store_true", help="print node counts and the op log")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("eval", parents=[common])
    p.add_argument("expr")
    p.add_argument("--input", action="append", metavar="NAME=VALUE")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", parents=[common])
    p.add_argument("expr")
    p.add_argument("--input", action="append", metavar="NAME=VALUE")
    p.add_argument("--wrt")
    p.add_argument("--tol", type=float, default=1e-5)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("check-equiv", parents=[common])
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--cases", type=int, default=500)
    p.add_argument("--max-nodes", type=int, default=200)
    p.set_defaults(func=cmd_check_equiv)

    p = sub.add_parser("unfold", parents=[common])
    p.add_argument("expr")
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("to-forest", parents=[common])
    p.add_argument("expr")
    p.set_defaults(func=cmd_to_forest)

    p = sub.add_parser("trace", parents=[common, diff_flags])
    p.add_argument("program", help="program text or .prog file")
    p.add_argument("--input", action="append", metavar="NAME=VALUE")
    p.add_argument("--dot")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("bench", parents=[common])
    p.add_argument("which", choices=("speelpenning", "swell", "random"))
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k-max", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export", parents=[common])
    p.add_argument("expr")
    p.add_argument("--dot", required=True, help="output path")
    p.add_argument("--forest", action="store_true", help="export the let-binding forest")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DomainError, UnboundVariable, StepLimitExceeded) as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc, OSError) else EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
