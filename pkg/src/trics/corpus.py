"""End-to-end batch run over the problem corpus."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass

from .checker import check_proof
from .conjecture import UnmappedObject, conjecture_from_plan, split_goals
from .kb import KnowledgeBase, ProblemSpec, enumerate_corpus, standard_kb
from .oracle import verify_plan
from .prover import InconsistencyDetected, ProverLimits, prove
from .solver import Unsolved, solve


@dataclass
class CorpusResult:
    problem: str
    solved: bool
    plan_length: int = 0
    verified: bool = False
    goals_proved: int = 0
    goals_total: int = 0
    prover_ms: int = 0
    reason: str | None = None

    @property
    def fully_proved(self) -> bool:
        return self.solved and self.verified and self.goals_total > 0 and self.goals_proved == self.goals_total

    def row(self) -> dict:
        d = asdict(self)
        d["fully_proved"] = self.fully_proved
        return d


def run_problem(problem: ProblemSpec, kb: KnowledgeBase, timeout: float = 10.0,
                trials: int = 20, seed: int = 0) -> CorpusResult:
    plan = solve(problem, kb)
    if isinstance(plan, Unsolved):
        return CorpusResult(problem.name, False, reason=plan.reason)
    res = CorpusResult(problem.name, True, len(plan.steps))
    res.verified = verify_plan(plan, trials, seed=seed).ok
    if not res.verified:
        res.reason = "VerificationFailed"
        return res
    try:
        tasks = split_goals(conjecture_from_plan(plan, kb), kb)
    except UnmappedObject:
        res.reason = "UnmappedObject"
        return res
    res.goals_total = len(tasks)
    t0 = time.monotonic()
    for task in tasks:
        left = timeout - (time.monotonic() - t0)
        if left <= 0:
            res.reason = res.reason or "Budget"
            break
        try:
            pf = prove(task, ProverLimits(timeout=left))
        except InconsistencyDetected:
            res.reason = res.reason or "Inconsistent"
            continue
        if not pf.proved:
            res.reason = res.reason or pf.reason
        elif not check_proof(pf):
            res.reason = res.reason or "CheckFailed"
        else:
            res.goals_proved += 1
    res.prover_ms = int(1000 * (time.monotonic() - t0))
    return res


def run_corpus(kb: KnowledgeBase | None = None, timeout: float = 10.0, trials: int = 20,
               seed: int = 0) -> list[CorpusResult]:
    kb = kb or standard_kb()
    return [run_problem(p, kb, timeout, trials, seed) for p in enumerate_corpus()]


def format_table(results: list[CorpusResult]) -> str:
    head = f"{'problem':<12} {'solved':<6} {'steps':>5} {'verified':<8} {'proved':>7} {'ms':>6}  reason"
    lines = [head, "-" * len(head)]
    for r in results:
        lines.append(f"{r.problem:<12} {'yes' if r.solved else 'no':<6} {r.plan_length:>5} "
                     f"{'yes' if r.verified else 'no':<8} {f'{r.goals_proved}/{r.goals_total}':>7} "
                     f"{r.prover_ms:>6}  {r.reason or ''}")
    solved = sum(r.solved for r in results)
    full = sum(r.fully_proved for r in results)
    goals = sum(r.goals_proved for r in results)
    total = sum(r.goals_total for r in results)
    lines.append(f"problems {len(results)}  solved {solved}  fully proved {full}  goals {goals}/{total}")
    return "\n".join(lines) + "\n"


def to_jsonl(results: list[CorpusResult]) -> str:
    return "".join(json.dumps(r.row(), sort_keys=True) + "\n" for r in results)
