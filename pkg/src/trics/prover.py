"""Ground forward-chaining prover for coherent rules with readable, replayable proofs."""
from __future__ import annotations

import hashlib
import time
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from . import tptp
from .conjecture import ProofTask
from .terms import Atom, CoherentRule, eq, is_var


class InconsistencyDetected(RuntimeError):
    def __init__(self, a: Atom, b: Atom):
        self.atoms = (a, b)
        super().__init__(f"both {a} and {b} derived")


@dataclass(frozen=True)
class ProverLimits:
    max_rounds: int = 200
    max_witnesses: int = 64
    timeout: float = 10.0
    max_facts: int = 200_000


@dataclass(frozen=True)
class ProofStep:
    index: int
    atoms: tuple[Atom, ...]
    rule: str
    kind: str                                    # mp | fact | witness | refl | qed
    instantiation: tuple[tuple[str, str], ...] = ()
    premises: tuple = ()                         # step indices or "h<i>" hypothesis tags
    witnesses: tuple[str, ...] = ()

    @property
    def atom(self) -> Atom:
        return self.atoms[0]


@dataclass
class ProofStats:
    rounds: int = 0
    facts: int = 0
    witnesses: int = 0
    seconds: float = 0.0


@dataclass
class Proof:
    task: ProofTask
    steps: list[ProofStep]
    status: str                                  # "Proved" | "Failed"
    reason: str | None = None                    # Fixpoint | Budget | Unsupported
    stats: ProofStats = field(default_factory=ProofStats)

    @property
    def proved(self) -> bool:
        return self.status == "Proved"

    def derived_atoms(self) -> list[Atom]:
        return [a for s in self.steps if s.kind != "qed" for a in s.atoms]

    def witness_count(self) -> int:
        return sum(len(s.witnesses) for s in self.steps)


@dataclass(frozen=True)
class _Just:
    kind: str                                    # hyp | fact | mp | witness
    rule: str = ""
    inst: tuple[tuple[str, str], ...] = ()
    premises: tuple[int, ...] = ()
    witnesses: tuple[str, ...] = ()
    tag: object = None


class _Compiled:
    __slots__ = ("rule", "pats", "concl", "exist")

    def __init__(self, rule: CoherentRule):
        self.rule = rule
        self.pats = [(p.pred, tuple((x, is_var(x)) for x in p.args)) for p in rule.premises]
        br = rule.branches[0]
        self.concl = br.atoms
        self.exist = br.existentials


class _Store:
    def __init__(self):
        self.atoms: list[Atom] = []
        self.just: list[_Just] = []
        self.ids: dict[Atom, int] = {}
        self.by_pred: dict[str, list[int]] = defaultdict(list)
        self.by_key: dict[tuple, list[int]] = defaultdict(list)

    def add(self, a: Atom, j: _Just) -> int:
        i = len(self.atoms)
        self.atoms.append(a)
        self.just.append(j)
        self.ids[a] = i
        self.by_pred[a.pred].append(i)
        for pos, x in enumerate(a.args):
            self.by_key[(a.pred, pos, x)].append(i)
        return i


class _Engine:
    def __init__(self, task: ProofTask, limits: ProverLimits):
        self.task = task
        self.limits = limits
        self.store = _Store()
        self.rules = [_Compiled(r) for r in task.axioms]
        self.has_sym = any(r.name == "eq_sym" for r in task.axioms)
        self.background = {x for a in task.facts for x in a.args}
        for r in task.axioms:
            self.background |= r.constants()
        self.constants = set(self.background) | {x for a in task.hypotheses for x in a.args}
        self.constants |= set(task.goal.args)
        self.fired: set[tuple] = set()
        self.witness_count = 0
        self.deadline = time.monotonic() + limits.timeout

    # -- store maintenance

    def _insert(self, a: Atom, j: _Just) -> int | None:
        s = self.store
        if a in s.ids:
            return None
        if a.pred == "neq" and a.args[0] == a.args[1]:
            raise InconsistencyDetected(a, eq(a.args[0], a.args[0]))
        if a.pred in ("eq", "neq"):
            other = Atom("neq" if a.pred == "eq" else "eq", a.args)
            for o in (other, other.mirrored()):
                if o in s.ids:
                    raise InconsistencyDetected(a, o)
        i = s.add(a, j)
        if a.pred == "eq" and self.has_sym:
            m = a.mirrored()
            if m not in s.ids:
                s.add(m, _Just("mp", "eq_sym", (("A", a.args[0]), ("B", a.args[1])), (i,)))
        return i

    # -- matching

    def _join(self, pats, binding, limit, old_limit, old_mask, ids, out):
        if not pats:
            out.append((tuple(ids), dict(binding)))
            return
        s = self.store
        best, best_cost, best_key = 0, None, None
        for k, (_, pred, args) in enumerate(pats):
            key = None
            nb = 0
            for pos, (x, v) in enumerate(args):
                if not v or x in binding:
                    nb += 1
                    if key is None:
                        key = (pred, pos, binding[x] if v else x)
            if key is not None:
                cost = len(s.by_key.get(key, ()))
                if nb == len(args):
                    cost = -1
            else:
                cost = len(s.by_pred.get(pred, ())) + 1_000_000
            if best_cost is None or cost < best_cost:
                best, best_cost, best_key = k, cost, key
        slot, pred, args = pats[best]
        rest = pats[:best] + pats[best + 1:]
        cap = old_limit if old_mask[slot] else limit
        if best_cost == -1:
            a = Atom.__new__(Atom)
            object.__setattr__(a, "pred", pred)
            object.__setattr__(a, "args", tuple(binding[x] if v else x for x, v in args))
            i = s.ids.get(a)
            if i is not None and i < cap:
                ids[slot] = i
                self._join(rest, binding, limit, old_limit, old_mask, ids, out)
            return
        cands = s.by_key.get(best_key, ()) if best_key is not None else s.by_pred.get(pred, ())
        atoms = s.atoms
        for i in cands:
            if i >= cap:
                break
            t = atoms[i].args
            added = []
            ok = True
            for (x, v), val in zip(args, t):
                if v:
                    cur = binding.get(x)
                    if cur is None:
                        binding[x] = val
                        added.append(x)
                    elif cur != val:
                        ok = False
                        break
                elif x != val:
                    ok = False
                    break
            if ok:
                ids[slot] = i
                self._join(rest, binding, limit, old_limit, old_mask, ids, out)
            for x in added:
                del binding[x]

    def _matches(self, c: _Compiled, delta_start: int, limit: int):
        """Premise matches using at least one fact with id in [delta_start, limit)."""
        out: list = []
        n = len(c.pats)
        s = self.store
        for d in range(n):
            pred, args = c.pats[d]
            for i in s.by_pred.get(pred, ()):
                if i < delta_start:
                    continue
                if i >= limit:
                    break
                binding = {}
                ok = True
                for (x, v), val in zip(args, s.atoms[i].args):
                    if v:
                        cur = binding.get(x)
                        if cur is None:
                            binding[x] = val
                        elif cur != val:
                            ok = False
                            break
                    elif x != val:
                        ok = False
                        break
                if not ok:
                    continue
                ids = [0] * n
                ids[d] = i
                rest = [(k, p, a) for k, (p, a) in enumerate(c.pats) if k != d]
                mask = [k < d for k in range(n)]
                self._join(rest, binding, limit, delta_start, mask, ids, out)
        return out

    def _inst(self, rule: CoherentRule, binding: dict) -> tuple:
        return tuple((v, binding[v]) for v in rule.universals if v in binding)

    # -- saturation

    def _check_budget(self):
        if time.monotonic() > self.deadline or len(self.store.atoms) > self.limits.max_facts:
            raise _Budget()

    def round(self, delta_start: int) -> int:
        """One semi-naive round; returns the id where this round's new facts start."""
        limit = len(self.store.atoms)
        pending: dict[Atom, _Just] = {}
        for c in self.rules:
            if c.exist or not c.pats:
                continue
            ms = self._matches(c, delta_start, limit)
            if not ms:
                continue
            self._check_budget()
            ms.sort(key=lambda m: m[0])
            if c.rule.is_disjunctive:
                raise _Unsupported(c.rule.name)
            for ids, b in ms:
                for a in c.concl:
                    g = a.substitute(b)
                    if g.pred == "eq" and g.args[0] == g.args[1]:
                        continue
                    if g in self.store.ids or g in pending:
                        continue
                    pending[g] = _Just("mp", c.rule.name, self._inst(c.rule, b), ids)
        start = len(self.store.atoms)
        for a, j in pending.items():
            self._insert(a, j)
        return start

    # -- existential witnesses

    def _witness_demand(self):
        s = self.store
        for r in self.rules:
            if not r.exist:
                continue
            for catom in r.concl:
                for cons in self.rules:
                    if cons.exist:
                        continue
                    for j, (pred, args) in enumerate(cons.pats):
                        if pred != catom.pred:
                            continue
                        rest = [(k, p, a) for k, (p, a) in enumerate(cons.pats) if k != j]
                        out: list = []
                        self._join(rest, {}, len(s.atoms), len(s.atoms), [False] * len(cons.pats),
                                   [0] * len(cons.pats), out)
                        out.sort(key=lambda m: m[0])
                        for _, b in out:
                            demand = self._demand_binding(r, catom, args, b)
                            if demand is not None:
                                return r, demand
        return None

    def _demand_binding(self, r: _Compiled, catom: Atom, args, b: dict):
        rb: dict[str, str] = {}
        for cx, (x, v) in zip(catom.args, args):
            val = (b.get(x) if v else x)
            if cx in r.exist:
                if val is not None:
                    return None
            elif is_var(cx):
                if val is None:
                    return None
                if rb.setdefault(cx, val) != val:
                    return None
            elif val is not None and val != cx:
                return None
        if any(u not in rb for u in r.rule.universals):
            return None
        if all(v in self.background for v in rb.values()):
            return None
        key = (r.rule.name,) + tuple(rb[u] for u in r.rule.universals)
        if key in self.fired:
            return None
        for p in r.rule.premises:
            if p.substitute(rb) not in self.store.ids:
                return None
        # already satisfied by an existing object?
        pats = [(k, a.pred, tuple((x, is_var(x) and x in r.exist) for x in a.substitute(rb).args))
                for k, a in enumerate(r.concl)]
        found: list = []
        n = len(self.store.atoms)
        self._join(pats, {}, n, n, [False] * len(pats), [0] * len(pats), found)
        if found:
            return None
        return rb

    def fire_witness(self) -> bool:
        if self.witness_count >= self.limits.max_witnesses:
            raise _Budget()
        d = self._witness_demand()
        if d is None:
            return False
        r, rb = d
        key = (r.rule.name,) + tuple(rb[u] for u in r.rule.universals)
        self.fired.add(key)
        names = []
        b = dict(rb)
        for v in r.exist:
            k = self.witness_count + 1
            name = f"w{k}"
            while name in self.constants:
                k += 1
                name = f"w{k}"
            self.constants.add(name)
            self.witness_count += 1
            names.append(name)
            b[v] = name
        prem_ids = tuple(self.store.ids[p.substitute(rb)] for p in r.rule.premises)
        atoms = [a.substitute(b) for a in r.concl]
        j = _Just("witness", r.rule.name, self._inst(r.rule, rb), prem_ids, tuple(names), tuple(atoms))
        for a in atoms:
            self._insert(a, j)
        return True


class _Budget(Exception):
    pass


class _Unsupported(Exception):
    pass


def _goal_id(store: _Store, goal: Atom) -> int | None:
    i = store.ids.get(goal)
    if i is None and goal.pred == "eq":
        i = store.ids.get(goal.mirrored())
    return i


def prove(task: ProofTask, limits: ProverLimits = ProverLimits()) -> Proof:
    t0 = time.monotonic()
    stats = ProofStats()
    goal = task.goal
    if goal.pred == "eq" and goal.args[0] == goal.args[1]:
        steps = [ProofStep(1, (goal,), "eq_refl", "refl"), ProofStep(2, (goal,), "QEDas", "qed", premises=(1,))]
        stats.seconds = time.monotonic() - t0
        return Proof(task, steps, "Proved", stats=stats)
    eng = _Engine(task, limits)
    for n, a in zip(task.fact_names, task.facts):
        eng._insert(a, _Just("fact", n))
    for i, a in enumerate(task.hypotheses):
        eng._insert(a, _Just("hyp", tag=i))
    delta = 0
    status, reason = "Failed", None
    try:
        while True:
            if _goal_id(eng.store, goal) is not None:
                status = "Proved"
                break
            if stats.rounds >= limits.max_rounds:
                reason = "Budget"
                break
            stats.rounds += 1
            before = len(eng.store.atoms)
            start = eng.round(delta)
            if len(eng.store.atoms) == before:
                if _goal_id(eng.store, goal) is not None:
                    continue
                if not eng.fire_witness():
                    reason = "Fixpoint"
                    break
                stats.witnesses = eng.witness_count
            delta = min(start, before)
    except _Budget:
        reason = "Budget"
    except _Unsupported:
        reason = "Unsupported"
    stats.facts = len(eng.store.atoms)
    stats.witnesses = eng.witness_count
    steps = _extract(eng.store, task, goal) if status == "Proved" else []
    stats.seconds = time.monotonic() - t0
    return Proof(task, steps, status, reason, stats)


def _extract(store: _Store, task: ProofTask, goal: Atom) -> list[ProofStep]:
    number: dict[int, object] = {}
    steps: list[ProofStep] = []
    hyp_index = {a: i for i, a in enumerate(task.hypotheses)}

    def visit(i: int):
        if i in number:
            return
        j = store.just[i]
        if j.kind == "hyp":
            number[i] = f"h{hyp_index[store.atoms[i]]}"
            return
        for p in j.premises:
            visit(p)
        if i in number:      # a witness step covers all its atoms
            return
        idx = len(steps) + 1
        prem = tuple(number[p] for p in j.premises)
        if j.kind == "fact":
            steps.append(ProofStep(idx, (store.atoms[i],), j.rule, "fact"))
            number[i] = idx
        elif j.kind == "witness":
            atoms = j.tag
            steps.append(ProofStep(idx, atoms, j.rule, "witness", j.inst, prem, j.witnesses))
            for a in atoms:
                number[store.ids[a]] = idx
        else:
            steps.append(ProofStep(idx, (store.atoms[i],), j.rule, "mp", j.inst, prem))
            number[i] = idx

    gid = _goal_id(store, goal)
    visit(gid)
    steps.append(ProofStep(len(steps) + 1, (goal,), "QEDas", "qed", premises=(number[gid],)))
    return steps


# ------------------------------------------------------------ staging

@dataclass(frozen=True)
class StageSpec:
    name: str
    goal: Atom
    export: bool = True


@dataclass
class Stage:
    name: str
    goal: Atom
    proof: Proof
    export: bool = True


class StageFailed(RuntimeError):
    def __init__(self, name: str, reason: str, stages: list):
        self.name, self.reason, self.stages = name, reason, stages
        super().__init__(f"stage {name} failed: {reason}")


def prove_staged(base: ProofTask, specs: Sequence[StageSpec],
                 limits: ProverLimits = ProverLimits()) -> list[Stage]:
    """Prove stages in order, adding each exported goal to the later stages' hypotheses."""
    hyps = list(base.hypotheses)
    done: list[Stage] = []
    for spec in specs:
        if not spec.goal.is_ground:
            raise ValueError(f"stage {spec.name}: goal must be ground")
        task = replace(base, name=spec.name, hypotheses=tuple(hyps), goal=spec.goal)
        pf = prove(task, limits)
        done.append(Stage(spec.name, spec.goal, pf, spec.export))
        if not pf.proved:
            raise StageFailed(spec.name, pf.reason or "Failed", done)
        if spec.export and spec.goal not in hyps:
            hyps.append(spec.goal)
    return done


def parse_stages(text: str) -> list[StageSpec]:
    """One stage per line: ``name : goal-atom``; a trailing ``!`` keeps the goal private."""
    from .terms import parse_atom

    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rest = line.partition(":")
        if not sep or not name.strip():
            raise ValueError(f"line {lineno}: expected 'name : goal'")
        rest = rest.strip()
        export = not rest.endswith("!")
        try:
            goal = parse_atom(rest.rstrip("!").strip())
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
        out.append(StageSpec(name.strip(), goal, export))
    return out


# ------------------------------------------------------------ rendering

def _inst_text(inst) -> str:
    return ", ".join(f"{v} -> {c}" for v, c in inst)


def render_step(step: ProofStep, lookup) -> str:
    n = step.index
    if step.kind == "qed":
        return f"{n}. Proved by assumption! (by QEDas)"
    if step.kind == "fact":
        return f"{n}. {step.atom} (by axiom {step.rule})"
    if step.kind == "refl":
        return f"{n}. {step.atom} (by eq_refl)"
    src = ", ".join(str(lookup(p)) for p in step.premises)
    frm = f"from {src} " if src else ""
    why = f"(by MP, {frm}using axiom {step.rule}; instantiation: {_inst_text(step.instantiation)})"
    if step.kind == "witness":
        ws = ", ".join(step.witnesses)
        return f"{n}. Let {ws} be such that {' & '.join(map(str, step.atoms))} {why}"
    return f"{n}. {step.atom} {why}"


def _lookup_fn(proof: Proof):
    by_index = {s.index: s for s in proof.steps}

    def lookup(ref):
        if isinstance(ref, str) and ref.startswith("h"):
            return proof.task.hypotheses[int(ref[1:])]
        return by_index[ref].atom
    return lookup


def render_proof_text(proof: Proof) -> str:
    if not proof.proved:
        return f"{proof.task.name}: not proved ({proof.reason})\n"
    lookup = _lookup_fn(proof)
    return "".join(render_step(s, lookup) + "\n" for s in proof.steps)


def render_theorem(proof: Proof) -> str:
    hyps = " & ".join(map(str, proof.task.hypotheses))
    head = f"{proof.task.name}:\n  {hyps}\n  => {proof.task.goal}\n" if hyps else f"{proof.task.name}: {proof.task.goal}\n"
    return head + "Proof:\n" + render_proof_text(proof)


def axiom_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def rule_digest(rule: CoherentRule) -> str:
    return axiom_digest(tptp.format_formula(tptp.rule_formula(rule)))


def fact_digest(a: Atom) -> str:
    return axiom_digest(tptp.format_formula(a))


def write_certificate(proof: Proof) -> str:
    """Line-oriented certificate: ``%`` header (task, goal, hypotheses, axiom digests), then the proof."""
    if not proof.proved:
        raise ValueError("only proved tasks have certificates")
    task = proof.task
    lines = [f"% task: {task.name}", f"% goal: {task.goal}"]
    lines += [f"% hypothesis h{i}: {a}" for i, a in enumerate(task.hypotheses)]
    rules = {r.name: r for r in task.axioms}
    facts = dict(zip(task.fact_names, task.facts))
    used: list[str] = []
    for s in proof.steps:
        if s.kind in ("mp", "witness", "fact") and s.rule not in used:
            used.append(s.rule)
    for name in used:
        if name in rules:
            lines.append(f"% axiom {name} {rule_digest(rules[name])}")
        elif name in facts:
            lines.append(f"% fact {name} {fact_digest(facts[name])}")
    lines.append("% proof")
    return "\n".join(lines) + "\n" + render_proof_text(proof)


def prove_all(tasks: Iterable[ProofTask], limits: ProverLimits = ProverLimits()) -> list[Proof]:
    return [prove(t, limits) for t in tasks]
