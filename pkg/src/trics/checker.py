"""Independent replay of proofs and certificates.

Nothing here searches: each step is re-instantiated from its recorded rule and substitution
and compared syntactically with what it claims.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .conjecture import ProofTask
from .kb import KnowledgeBase
from .prover import Proof, ProofStep, fact_digest, rule_digest
from .terms import Atom, Sort, infer_sorts, parse_atom, well_sorted


@dataclass(frozen=True)
class Valid:
    steps: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Invalid:
    step: int
    reason: str

    def __bool__(self):
        return False


def _goal_match(a: Atom, goal: Atom) -> bool:
    return a == goal or (goal.pred == "eq" and a == goal.mirrored())


def check_proof(proof: Proof) -> Valid | Invalid:
    try:
        return _check(proof.task, proof.steps)
    except Exception as e:          # malformed input must not escape as an exception
        return Invalid(0, f"malformed proof: {type(e).__name__}: {e}")


def _check(task: ProofTask, steps: list[ProofStep]) -> Valid | Invalid:
    if not steps:
        return Invalid(0, "empty proof")
    rules = {r.name: r for r in task.axioms}
    facts = dict(zip(task.fact_names, task.facts))
    sorts: dict[str, Sort] = {k: v for k, v in
                              infer_sorts(list(task.facts) + list(task.hypotheses) + [task.goal], {}).items()
                              if v is not None}
    known_consts = set(sorts) | task.constants()
    have: dict[int, tuple[Atom, ...]] = {}
    for k, st in enumerate(steps, 1):
        if st.index != k:
            return Invalid(k, f"step numbered {st.index}, expected {k}")
        if st.kind == "qed":
            if k != len(steps):
                return Invalid(k, "QED before the last step")
            (ref,) = st.premises
            if k > 1 and ref != k - 1:
                return Invalid(k, "QED must cite the step just before it")
            got = _resolve(ref, task, have)
            if got is None:
                return Invalid(k, f"unknown reference {ref!r}")
            if not any(_goal_match(a, task.goal) for a in got):
                return Invalid(k, f"QED cites {got[0]}, not the goal {task.goal}")
            return Valid(len(steps))
        if st.kind == "refl":
            a = st.atom
            if a.pred != "eq" or a.args[0] != a.args[1]:
                return Invalid(k, "eq_refl on a non-reflexive atom")
            have[k] = (a,)
            continue
        if st.kind == "fact":
            if facts.get(st.rule) != st.atom:
                return Invalid(k, f"{st.atom} is not the KB fact {st.rule}")
            have[k] = (st.atom,)
            continue
        if st.kind not in ("mp", "witness"):
            return Invalid(k, f"unknown step kind {st.kind!r}")
        rule = rules.get(st.rule)
        if rule is None:
            return Invalid(k, f"axiom {st.rule} is not available to this task")
        inst = dict(st.instantiation)
        if len(inst) != len(st.instantiation) or set(inst) != set(rule.universals):
            return Invalid(k, "instantiation does not bind exactly the rule's universals")
        for v, c in inst.items():
            want = rule.var_sorts.get(v)
            if want is not None and sorts.get(c) is not None and sorts[c] != want:
                return Invalid(k, f"{v} -> {c}: {c} is a {sorts[c].value}, expected {want.value}")
        if len(st.premises) != len(rule.premises):
            return Invalid(k, f"{st.rule} has {len(rule.premises)} premises, step cites {len(st.premises)}")
        for ref, pat in zip(st.premises, rule.premises):
            got = _resolve(ref, task, have)
            if got is None:
                return Invalid(k, f"premise {ref!r} is not an earlier step or hypothesis")
            need = pat.substitute(inst)
            if need not in got:
                return Invalid(k, f"premise {ref!r} is {got[0]}, rule needs {need}")
        if rule.is_disjunctive or len(rule.branches) != 1:
            return Invalid(k, f"{st.rule} is disjunctive")
        branch = rule.branches[0]
        if st.kind == "witness":
            if len(st.witnesses) != len(branch.existentials):
                return Invalid(k, "witness count does not match the rule")
            for w in st.witnesses:
                if w in known_consts:
                    return Invalid(k, f"witness {w} is not fresh")
            b = dict(inst)
            b.update(zip(branch.existentials, st.witnesses))
            expect = tuple(a.substitute(b) for a in branch.atoms)
            if tuple(st.atoms) != expect:
                return Invalid(k, f"witness atoms differ from {', '.join(map(str, expect))}")
            for v, w in zip(branch.existentials, st.witnesses):
                known_consts.add(w)
                if rule.var_sorts.get(v) is not None:
                    sorts[w] = rule.var_sorts[v]
        else:
            if branch.existentials:
                return Invalid(k, f"{st.rule} is existential; step must introduce a witness")
            expect = tuple(a.substitute(inst) for a in branch.atoms)
            if len(st.atoms) != 1 or st.atom not in expect:
                return Invalid(k, f"{st.atoms[0] if st.atoms else '?'} does not follow from {st.rule}")
        for a in st.atoms:
            for x in a.args:
                if x not in known_consts:
                    return Invalid(k, f"unknown constant {x}")
            if not well_sorted(a, sorts):
                return Invalid(k, f"{a} is ill-sorted")
        have[k] = tuple(st.atoms)
    return Invalid(len(steps), "no QED step")


def _resolve(ref, task: ProofTask, have: dict):
    if isinstance(ref, str):
        m = re.fullmatch(r"h(\d+)", ref)
        if m and int(m.group(1)) < len(task.hypotheses):
            return (task.hypotheses[int(m.group(1))],)
        return None
    return have.get(ref)


# ------------------------------------------------------------ certificates

class CertificateError(ValueError):
    pass


_STEP = re.compile(r"^(\d+)\.\s+(.*)$")
_MP = re.compile(r"^(.*?) \(by MP, (?:from (.*) )?using axiom (\S+); instantiation: (.*)\)$")
_FACT = re.compile(r"^(.*) \(by axiom (\S+)\)$")
_WIT = re.compile(r"^Let (.*?) be such that (.*)$")


def _split_atoms(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur).strip())
    return parts


def read_certificate(text: str, kb: KnowledgeBase) -> Proof:
    """Rebuild a proof from certificate text, resolving axioms by name against ``kb``.

    Raises CertificateError when the header is malformed or an axiom digest does not match."""
    name = goal = None
    hyps: list[Atom] = []
    axioms = []
    rules = {r.name: r for r in kb.rules}
    kb_facts = dict(zip(kb.fact_names(), kb.facts))
    body: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if not line.startswith("%"):
            body.append(line)
            continue
        h = line[1:].strip()
        try:
            if h.startswith("task:"):
                name = h[5:].strip()
            elif h.startswith("goal:"):
                goal = parse_atom(h[5:].strip())
            elif h.startswith("hypothesis"):
                tag, _, a = h[len("hypothesis"):].partition(":")
                if tag.strip() != f"h{len(hyps)}":
                    raise CertificateError(f"line {lineno}: hypotheses out of order")
                hyps.append(parse_atom(a.strip()))
            elif h.startswith("axiom ") or h.startswith("fact "):
                kind, ax, digest = h.split()
                if kind == "axiom":
                    if ax not in rules:
                        raise CertificateError(f"line {lineno}: unknown axiom {ax}")
                    if rule_digest(rules[ax]) != digest:
                        raise CertificateError(f"line {lineno}: axiom {ax} differs from the knowledge base")
                    axioms.append(rules[ax])
                elif ax not in kb_facts or fact_digest(kb_facts[ax]) != digest:
                    raise CertificateError(f"line {lineno}: fact {ax} differs from the knowledge base")
        except ValueError as e:
            if isinstance(e, CertificateError):
                raise
            raise CertificateError(f"line {lineno}: {e}") from None
    if name is None or goal is None:
        raise CertificateError("missing task or goal header")
    task = ProofTask(name, tuple(hyps), kb.facts, tuple(axioms), goal, tuple(kb.fact_names()))
    steps = [_parse_step(line, hyps, i) for i, line in enumerate(body, 1)]
    by_atom: dict[Atom, int] = {}
    resolved = []
    for st in steps:
        prem = []
        for p in st.premises:
            a = parse_atom(p)
            if a in by_atom:
                prem.append(by_atom[a])
            elif a in hyps:
                prem.append(f"h{hyps.index(a)}")
            else:
                raise CertificateError(f"step {st.index}: premise {p} has no source")
        st = ProofStep(st.index, st.atoms, st.rule, st.kind, st.instantiation, tuple(prem), st.witnesses)
        for a in st.atoms:
            by_atom.setdefault(a, st.index)
        resolved.append(st)
    if resolved and resolved[-1].kind == "qed":
        last = resolved[-1]
        prior = [s for s in resolved[:-1] if any(_goal_match(a, goal) for a in s.atoms)]
        if prior:
            ref = prior[-1].index
        else:
            cand = [h for h in (goal, goal.mirrored() if goal.pred == "eq" else goal) if h in hyps]
            ref = f"h{hyps.index(cand[0])}" if cand else -1
        resolved[-1] = ProofStep(last.index, (goal,), last.rule, "qed", premises=(ref,))
    return Proof(task, resolved, "Proved")


def _parse_step(line: str, hyps, expect: int) -> ProofStep:
    m = _STEP.match(line)
    if not m:
        raise CertificateError(f"unparsable step line: {line}")
    idx, rest = int(m.group(1)), m.group(2)
    if rest == "Proved by assumption! (by QEDas)":
        return ProofStep(idx, (), "QEDas", "qed")
    if rest.endswith("(by eq_refl)"):
        return ProofStep(idx, (parse_atom(rest[: -len("(by eq_refl)")].strip()),), "eq_refl", "refl")
    mm = _MP.match(rest)
    if mm:
        head, src, rule, inst = mm.groups()
        pairs = tuple(tuple(x.strip() for x in p.split("->")) for p in inst.split(",") if p.strip())
        prem = tuple(_split_atoms(src)) if src else ()
        w = _WIT.match(head)
        if w:
            names = tuple(x.strip() for x in w.group(1).split(","))
            atoms = tuple(parse_atom(a.strip()) for a in w.group(2).split(" & "))
            return ProofStep(idx, atoms, rule, "witness", pairs, prem, names)
        return ProofStep(idx, (parse_atom(head),), rule, "mp", pairs, prem)
    mf = _FACT.match(rest)
    if mf:
        return ProofStep(idx, (parse_atom(mf.group(1)),), mf.group(2), "fact")
    raise CertificateError(f"unparsable step line: {line}")


def check_certificate(text: str, kb: KnowledgeBase) -> Valid | Invalid:
    try:
        proof = read_certificate(text, kb)
    except (CertificateError, ValueError) as e:
        return Invalid(0, str(e))
    return check_proof(proof)


def split_certificates(text: str) -> list[str]:
    """Separate concatenated certificates; each starts at a ``% task:`` header line."""
    out: list[list[str]] = []
    for line in text.splitlines(keepends=True):
        if line.startswith("% task:") or not out:
            out.append([])
        out[-1].append(line)
    return ["".join(c) for c in out if "".join(c).strip()]
