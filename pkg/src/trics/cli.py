"""Command-line entry point: ``trics <command> ...``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

EXIT_OK, EXIT_FAIL, EXIT_UNSOLVED, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_seed() -> int:
    raw = os.environ.get("TRICS_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"TRICS_SEED must be an integer, got {raw!r}") from None


def _problem(labels):
    from .kb import ProblemSpec

    try:
        return ProblemSpec(tuple(labels))
    except ValueError as e:
        raise UsageError(str(e)) from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _read_plan(path: str):
    from .plan import PlanError, parse_plan

    try:
        return parse_plan(_read(path))
    except (PlanError, ValueError) as e:
        raise UsageError(f"{path}: {e}") from None


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def cmd_solve(args) -> int:
    from .solver import Unsolved, explain_plan, solve

    plan = solve(_problem(args.points))
    if isinstance(plan, Unsolved):
        print(f"unsolved: {plan.reason}: {plan.detail}", file=sys.stderr)
        return EXIT_UNSOLVED
    print(explain_plan(plan))
    if args.plan_out:
        Path(args.plan_out).write_text(plan.format())
    return EXIT_OK


def cmd_prove(args) -> int:
    from .checker import check_proof
    from .conjecture import conjecture_from_plan, split_goals
    from .kb import standard_kb
    from .prover import (InconsistencyDetected, ProverLimits, StageFailed, parse_stages,
                         prove, prove_staged, render_theorem, write_certificate)
    from .solver import Unsolved, solve

    kb = standard_kb()
    plan = solve(_problem(args.points), kb)
    if isinstance(plan, Unsolved):
        print(f"unsolved: {plan.reason}: {plan.detail}", file=sys.stderr)
        return EXIT_UNSOLVED
    limits = ProverLimits(timeout=args.timeout)
    tasks = split_goals(conjecture_from_plan(plan, kb), kb)
    proofs = []
    try:
        if args.stages:
            try:
                specs = parse_stages(_read(args.stages))
            except ValueError as e:
                raise UsageError(f"{args.stages}: {e}") from None
            try:
                proofs = [st.proof for st in prove_staged(tasks[0], specs, limits)]
            except StageFailed as e:
                proofs = [st.proof for st in e.stages]
        else:
            proofs = [prove(t, limits) for t in tasks]
    except InconsistencyDetected as e:
        print(f"inconsistent: {e}", file=sys.stderr)
        return EXIT_FAIL
    ok = bool(proofs)
    certs = []
    for pf in proofs:
        print(render_theorem(pf))
        if not pf.proved:
            ok = False
            continue
        verdict = check_proof(pf)
        if not verdict:
            print(f"check failed at step {verdict.step}: {verdict.reason}", file=sys.stderr)
            ok = False
        certs.append(write_certificate(pf))
    if args.certificate:
        Path(args.certificate).write_text("".join(certs))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    from .oracle import verify_plan

    plan = _read_plan(args.plan)
    seed = args.seed if args.seed is not None else _default_seed()
    report = verify_plan(plan, args.trials, args.tol, seed)
    print(report.format(), end="")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_export(args) -> int:
    from .conjecture import export_problem
    from .kb import standard_kb
    from .solver import Unsolved, solve

    kb = standard_kb()
    plan = solve(_problem(args.points), kb)
    if isinstance(plan, Unsolved):
        print(f"unsolved: {plan.reason}: {plan.detail}", file=sys.stderr)
        return EXIT_UNSOLVED
    Path(args.out).write_text(export_problem(plan, kb))
    return EXIT_OK


def cmd_corpus(args) -> int:
    from .corpus import format_table, run_corpus, to_jsonl

    seed = args.seed if args.seed is not None else _default_seed()
    results = run_corpus(timeout=args.timeout, trials=args.trials, seed=seed)
    print(format_table(results), end="")
    if args.out:
        Path(args.out).write_text(to_jsonl(results))
    return EXIT_OK if all(r.verified for r in results if r.solved) else EXIT_FAIL


def cmd_svg(args) -> int:
    from .oracle import ExecutionFailure
    from .svg import render_svg

    plan = _read_plan(args.plan)
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        text = render_svg(plan, seed)
    except ExecutionFailure as e:
        print(f"cannot execute plan: {e}", file=sys.stderr)
        return EXIT_FAIL
    Path(args.out).write_text(text)
    return EXIT_OK


def cmd_kb_validate(args) -> int:
    from .kb import standard_kb, validate_kb

    seed = args.seed if args.seed is not None else _default_seed()
    report = validate_kb(standard_kb(), args.trials, seed)
    print(report.format(), end="")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_check_cert(args) -> int:
    from .checker import check_certificate, split_certificates
    from .kb import standard_kb

    kb = standard_kb()
    texts = split_certificates(_read(args.file))
    if not texts:
        raise UsageError(f"{args.file}: no certificate found")
    ok = True
    for text in texts:
        verdict = check_certificate(text, kb)
        head = text.splitlines()[0].removeprefix("% task:").strip()
        if verdict:
            print(f"{head}: valid ({verdict.steps} steps)")
        else:
            print(f"{head}: invalid at step {verdict.step}: {verdict.reason}")
            ok = False
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="trics", description="Triangle constructions: solve, prove, verify.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="find a construction plan")
    s.add_argument("points", nargs=3)
    s.add_argument("--plan-out")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("prove", help="solve, then prove the construction correct")
    s.add_argument("points", nargs=3)
    s.add_argument("--stages")
    s.add_argument("--timeout", type=_positive(float), default=10.0)
    s.add_argument("--certificate")
    s.set_defaults(func=cmd_prove)

    s = sub.add_parser("verify", help="check a plan numerically")
    s.add_argument("--plan", required=True)
    s.add_argument("--trials", type=_positive(int), default=100)
    s.add_argument("--tol", type=_positive(float), default=1e-9)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("export-tptp", help="write axioms and conjecture as TPTP")
    s.add_argument("points", nargs=3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_export)

    s = sub.add_parser("corpus", help="run every corpus problem end to end")
    s.add_argument("--timeout", type=_positive(float), default=10.0)
    s.add_argument("--trials", type=_positive(int), default=20)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_corpus)

    s = sub.add_parser("render-svg", help="draw an executed plan")
    s.add_argument("--plan", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_svg)

    s = sub.add_parser("kb-validate", help="model-check every KB rule")
    s.add_argument("--trials", type=_positive(int), default=100)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_kb_validate)

    s = sub.add_parser("check-cert", help="replay proof certificates")
    s.add_argument("file")
    s.set_defaults(func=cmd_check_cert)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except UsageError as e:
        print(f"trics: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
