"""Command line interface: ``decprune solve`` and ``decprune bench``."""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence

from decprune.bench import verify_scaling
from decprune.dot import export_dot
from decprune.errors import ProblemError
from decprune.solvers import METHODS, Solution, solve
from decprune.textio import load_problem

EXIT_OK, EXIT_USAGE, EXIT_PROBLEM = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _int_range(text: str) -> list[int]:
    """``4``, ``4-10`` or ``4,6,8``."""
    try:
        if "-" in text.strip("-"):
            lo, hi = text.split("-", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer or range: {text!r}") from None


def _methods(text: str) -> list[str]:
    if text == "all":
        return list(METHODS)
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [x for x in names if x not in METHODS]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown method {bad[0] if bad else text!r}; choose from {', '.join(METHODS)}"
        )
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="decprune", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="represent and solve a .dtp problem")
    p.add_argument("file")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--dt-order", help="comma-separated decision/scenario tree sequence")
    p.add_argument("--coalesce", action="store_true", help="coalesce the decision tree")
    p.add_argument("--count-ops", action="store_true", help="print the operation counts")
    p.add_argument("--dot", metavar="PATH", help="write the solved tree as DOT")
    p.add_argument("--json", action="store_true")

    b = sub.add_parser("bench", help="operation-count scaling on random problems")
    b.add_argument("--chance", type=_int_range, required=True, metavar="M")
    b.add_argument("--decision", type=_int_range, required=True, metavar="N")
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--methods", type=_methods, required=True, metavar="LIST")
    b.add_argument("--trials", type=int, default=1)
    b.add_argument("--json", action="store_true")
    return parser


def _solution_json(problem_name: str, sol: Solution) -> dict:
    out = {
        "problem": problem_name,
        "method": sol.method,
        "strategy": sol.strategy.as_dict(),
        "expected_utility": sol.expected_utility,
        "ops": sol.cost.as_dict(),
    }
    if sol.per_strategy_utilities is not None:
        out["per_strategy_utilities"] = [
            {"strategy": s.as_dict(), "expected_utility": eu}
            for s, eu in sol.per_strategy_utilities.items()
        ]
    return out


def _cmd_solve(args, out) -> int:
    if args.coalesce and args.method != "dt-rollback":
        raise UsageError("--coalesce only applies to --method dt-rollback")
    if args.dt_order and args.method not in ("dt-rollback", "st-prune"):
        raise UsageError("--dt-order only applies to dt-rollback and st-prune")
    if args.dot and args.method == "matrix":
        raise UsageError("--dot needs a tree method")
    try:
        problem = load_problem(args.file)
    except OSError as exc:
        print(f"decprune: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_PROBLEM
    order = args.dt_order.split(",") if args.dt_order else None
    sol = solve(problem, args.method, order=order, coalesce=args.coalesce)

    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(export_dot(sol.tree, sol))

    if args.json:
        json.dump(_solution_json(problem.name, sol), out, indent=2)
        out.write("\n")
        return EXIT_OK
    print(f"problem: {problem.name}", file=out)
    print(f"method: {sol.method}", file=out)
    if sol.per_strategy_utilities is not None:
        for s, eu in sol.per_strategy_utilities.items():
            print(f"strategy-eu: {s.label()} {eu:.4f}", file=out)
    print(f"strategy: {sol.strategy.label()}", file=out)
    print(f"expected-utility: {sol.expected_utility:.4f}", file=out)
    if args.count_ops:
        print(sol.cost.line(), file=out)
        if "coalesced_nodes" in sol.cost.info:
            print(f"coalesced-nodes: {sol.cost.info['coalesced_nodes']}", file=out)
    return EXIT_OK


def _cmd_bench(args, out) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    rows, skipped = verify_scaling(
        args.chance, args.decision, args.methods, seed=args.seed, trials=args.trials
    )
    if args.json:
        payload = {
            "rows": [
                {
                    "method": r.method, "m": r.m, "n": r.n, "trial": r.trial,
                    "k": r.k, "bayesian_revision": r.revision,
                    "measured": r.measured, "formula": r.formula, "ratio": r.ratio,
                    "expected_utility": r.expected_utility,
                }
                for r in rows
            ],
            "skipped": [{"method": s[0], "m": s[1], "n": s[2]} for s in skipped],
        }
        json.dump(payload, out, indent=2)
        out.write("\n")
        return EXIT_OK
    print("method\tm\tn\ttrial\tk\tmeasured\tformula\tratio", file=out)
    for r in rows:
        print(
            f"{r.method}\t{r.m}\t{r.n}\t{r.trial}\t{r.k}\t{r.measured}\t"
            f"{r.formula}\t{r.ratio:.3f}",
            file=out,
        )
    for method, m, n in skipped:
        print(f"# skipped {method} m={m} n={n}: strategy matrix too large", file=out)
    return EXIT_OK


def run_cli(argv: Sequence[str] | None = None, out=None) -> int:
    """Run the CLI and return its exit code.

    0 on success, 1 on usage errors, 2 when the problem cannot be read,
    parsed, validated or built.
    """
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command == "solve":
            return _cmd_solve(args, out)
        return _cmd_bench(args, out)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ProblemError as exc:
        print(f"decprune: {exc}", file=sys.stderr)
        return EXIT_PROBLEM


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
