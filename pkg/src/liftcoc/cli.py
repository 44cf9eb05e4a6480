"""Command-line entry point: `python -m src.liftcoc.cli <command> ...`."""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from fractions import Fraction
from functools import partial
from pathlib import Path
from typing import Sequence

import pandas as pd

from src.liftcoc.cocycles import (
    CocycleSpec,
    operands_from_text,
    paired_derivations,
    psi,
    psi_stable,
    suggested_depth,
)
from src.liftcoc.cohomology import CochainHandle, coboundary_eval, find_cycles
from src.liftcoc.config import (
    DEFAULT_DEPTH,
    DEFAULT_GL_WINDOW,
    DEFAULT_LAMBDAS,
    DEFAULT_MAX_DEGREE,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    SCAN_DEPTH,
    resolve_depth,
)
from src.liftcoc.errors import LiftcocError
from src.liftcoc.experiments import (
    all_passed,
    format_rational,
    map_ordered,
    reports_frame,
    reports_to_json,
    run_4_3_4,
    run_4_3_5,
    run_4_4,
    save_reports,
)
from src.liftcoc.matrices import AugmentedOp, aug_trace, random_augmented
from src.liftcoc.parser import parse_operator, parse_symbol, split_arguments
from src.liftcoc.symbols import (
    AdLnD,
    AdLnX,
    TruncationPolicy,
    alternation_defect,
    apply_derivation,
    bracket,
    commutator_defect,
    derivation_basis,
    random_symbol,
    residue,
    stability_check,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


# ── Output ───────────────────────────────────────────────────────────────


def _emit(rows: list[dict], args: argparse.Namespace) -> None:
    text = json.dumps(rows, indent=2, ensure_ascii=False)
    if args.table:
        frame = pd.DataFrame(rows)
        print(frame.to_string(index=False) if not frame.empty else "(no rows)")
    else:
        print(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")


# ── Commands ─────────────────────────────────────────────────────────────


def _default_depth(ops: Sequence[AugmentedOp], series_order: int) -> int:
    """DEFAULT_DEPTH, raised when the inputs need more room."""
    return max(DEFAULT_DEPTH, suggested_depth(ops, series_order))


def cmd_residue(args: argparse.Namespace) -> int:
    def value(depth: int) -> Fraction:
        op = parse_operator(args.expression, args.vars, depth)
        return aug_trace(op) if op.finite else residue(op.id_part)

    scanned = parse_operator(args.expression, args.vars, SCAN_DEPTH)
    depth = resolve_depth(args.depth, fallback=_default_depth([scanned], 0))
    result = stability_check(value, TruncationPolicy(depth))
    _emit(
        [
            {
                "expression": args.expression,
                "residue": str(result.value),
                "stable": result.stable,
                "depths": list(result.depths),
            }
        ],
        args,
    )
    return EXIT_OK if result.stable else EXIT_MISMATCH


def _spec(k: int, s: int, formula: str, n: int, depth: int) -> CocycleSpec:
    return CocycleSpec(k, s, paired_derivations(k), formula, TruncationPolicy(depth), n=n)


def cmd_eval(args: argparse.Namespace) -> int:
    n = max(args.vars, (args.k + 1) // 2)
    build = operands_from_text(args.args, n, args.lam)
    arity = args.k + 2 * args.s - 1
    depth = resolve_depth(args.depth, fallback=_default_depth(build(SCAN_DEPTH), arity))
    spec = _spec(args.k, args.s, args.formula, n, depth)
    result = psi_stable(spec, build)
    _emit(
        [
            {
                "k": args.k,
                "s": args.s,
                "formula": spec.resolved_formula,
                "value": format_rational(result.value),
                "stable": result.stable,
                "depths": list(result.depths),
            }
        ],
        args,
    )
    return EXIT_OK if result.stable else EXIT_MISMATCH


def _cocycle_trial(
    trial: int, k: int, s: int, formula: str, seed: int, window: int, max_degree: int, depth: int
) -> dict:
    n = (k + 1) // 2
    spec = _spec(k, s, formula, n, depth)

    def delta(d: int) -> Fraction:
        rng = random.Random(seed + trial)
        operands = [
            random_augmented(rng, n, window, max_degree, d) for _ in range(spec.arity + 1)
        ]
        deep = spec.with_depth(d)
        handle = CochainHandle(deep.arity, partial(psi, deep), "psi")
        return coboundary_eval(handle, operands)

    result = stability_check(delta, spec.policy)
    return {
        "trial": trial,
        "value": format_rational(result.value),
        "stable": result.stable,
        "zero": result.value == 0 and result.bumped_value == 0,
    }


def cmd_verify_cocycle(args: argparse.Namespace) -> int:
    arity = args.k + 2 * args.s - 1
    depth = max(resolve_depth(args.depth), (arity + 1) * args.maxdeg + 4)
    logger.info("checking δΨ_%d on %d tuples at depth %d", arity, args.trials, depth)
    rows = map_ordered(
        partial(
            _cocycle_trial,
            k=args.k,
            s=args.s,
            formula=args.formula,
            seed=args.seed,
            window=args.gl,
            max_degree=args.maxdeg,
            depth=depth,
        ),
        list(range(args.trials)),
        args.jobs,
    )
    _emit(rows, args)
    return EXIT_OK if all(r["zero"] and r["stable"] for r in rows) else EXIT_MISMATCH


def _algebra_checks(trials: int, seed: int, depth: int) -> list[dict]:
    rng = random.Random(seed)
    policy = TruncationPolicy(depth)
    pole = -max(depth - 2, 1)
    rows = []
    for n in (1, 2):
        trace_failures = der_failures = commutator_failures = 0
        for _ in range(trials):
            a = random_symbol(rng, n, 2, depth, min_exponent=pole)
            b = random_symbol(rng, n, 2, depth, min_exponent=pole)
            if residue(bracket(a, b)):
                trace_failures += 1
            for derivation in derivation_basis(n):
                if residue(apply_derivation(derivation, a)):
                    der_failures += 1
            poly = random_symbol(rng, n, 3, depth)
            v = rng.randint(1, n)
            if commutator_defect(AdLnD(v), AdLnX(v), poly, policy):
                commutator_failures += 1

        basis = derivation_basis(n)
        alternation_failures = 0
        triples = [
            (i, j, l)
            for i in range(1, 2 * n + 1)
            for j in range(i + 1, 2 * n + 1)
            for l in range(j + 1, 2 * n + 1)
        ]
        for i, j, l in triples:
            if alternation_defect(basis, i, j, l, n, policy):
                alternation_failures += 1

        rows += [
            {"n": n, "check": "residue of brackets", "cases": trials, "failures": trace_failures},
            {
                "n": n,
                "check": "residue of log derivatives",
                "cases": trials * 2 * n,
                "failures": der_failures,
            },
            {
                "n": n,
                "check": "[ln d, ln x] = ad Q",
                "cases": trials,
                "failures": commutator_failures,
            },
            {
                "n": n,
                "check": "alternated D(Q)",
                "cases": len(triples),
                "failures": alternation_failures,
            },
        ]
    return rows


def cmd_verify_algebra(args: argparse.Namespace) -> int:
    rows = _algebra_checks(args.trials, args.seed, resolve_depth(args.depth))
    _emit(rows, args)
    return EXIT_OK if all(r["failures"] == 0 for r in rows) else EXIT_MISMATCH


def cmd_cycles(args: argparse.Namespace) -> int:
    depth = resolve_depth(args.depth)
    basis = [parse_symbol(text, args.vars, depth) for text in split_arguments(args.basis)]
    cycles = find_cycles(args.gl, args.degree, basis, n=args.vars, depth=depth)
    rows = [
        {"cycle": idx, "word": " ^ ".join(str(key) for key in word), "coeff": format_rational(c)}
        for idx, cycle in enumerate(cycles)
        for word, c in sorted(cycle.items())
    ]
    _emit(rows, args)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    depth = resolve_depth(args.depth)
    if args.section == "4.3.4":
        reports = run_4_3_4(depth)
    elif args.section == "4.3.5":
        reports = run_4_3_5(args.lambdas, depth, args.jobs)
    else:
        reports = run_4_4(args.n, depth, allow_slow=args.allow_slow, jobs=args.jobs)

    if args.table:
        print(reports_frame(reports).to_string(index=False))
    else:
        print(reports_to_json(reports, timings=args.timings))
    if args.out:
        save_reports(reports, Path(args.out))
    return EXIT_OK if all_passed(reports) else EXIT_MISMATCH


# ── Parser ───────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftcoc", description="Exact evaluation of lifted cocycles"
    )
    parser.add_argument("--depth", type=int, default=None, help="truncation depth N")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    fmt = parser.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--table", action="store_true", help="plain table output")
    parser.add_argument("--timings", action="store_true", help="include wall times in JSON")
    parser.add_argument("--out", type=str, default=None, help="also write the output here")
    parser.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("residue", help="residue (or trace) of an operator")
    p.add_argument("expression")
    p.add_argument("--vars", type=int, default=1)
    p.set_defaults(handler=cmd_residue)

    p = sub.add_parser("eval", help="evaluate Ψ on operators")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--args", required=True, help="comma separated operators")
    p.add_argument("--lambda", dest="lam", type=Fraction, default=None)
    p.add_argument("--formula", choices=["auto", "interval", "pair", "circle"], default="auto")
    p.add_argument("--vars", type=int, default=1)
    p.set_defaults(handler=cmd_eval)

    verify = sub.add_parser("verify", help="property checks").add_subparsers(
        dest="target", required=True
    )
    p = verify.add_parser("cocycle", help="δΨ = 0 on random tuples")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--gl", type=int, default=DEFAULT_GL_WINDOW)
    p.add_argument("--maxdeg", type=int, default=DEFAULT_MAX_DEGREE)
    p.add_argument("--formula", choices=["auto", "interval", "pair", "circle"], default="auto")
    p.set_defaults(handler=cmd_verify_cocycle)

    p = verify.add_parser("algebra", help="trace, log-derivation and Q identities")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(handler=cmd_verify_algebra)

    p = sub.add_parser("cycles", help="basis of matrix Lie cycles")
    p.add_argument("--gl", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--basis", default="1", help="comma separated coefficient symbols")
    p.add_argument("--vars", type=int, default=1)
    p.set_defaults(handler=cmd_cycles)

    p = sub.add_parser("reproduce", help="run a named experiment")
    p.add_argument("section", choices=["4.3.4", "4.3.5", "4.4"])
    p.add_argument("--lambdas", type=Fraction, nargs="+", default=list(DEFAULT_LAMBDAS))
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--allow-slow", action="store_true")
    p.set_defaults(handler=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING, format=LOG_FORMAT
    )
    try:
        return args.handler(args)
    except (LiftcocError, ValueError) as exc:
        print(f"liftcoc: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
