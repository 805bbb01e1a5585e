"""Correctness conjectures for construction plans, split into single-goal proof tasks."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import tptp
from .kb import KnowledgeBase
from .plan import VERTICES, ConstructionPlan
from .terms import Atom, CoherentRule, Sort, atom, eq, infer_sorts, neq

_SIDE_PRIMED = {"bc": "a1", "ca": "b1", "ab": "c1"}
_VERTEX_CONSTS = {"pA", "pB", "pC"}


class UnmappedObject(ValueError):
    pass


@dataclass(frozen=True)
class Conjecture:
    name: str
    hypotheses: tuple[Atom, ...]
    nondegeneracy: tuple[Atom, ...]
    goals: tuple[Atom, ...]
    naming: dict = field(default_factory=dict, compare=False)   # plan name -> constant

    def premises(self) -> tuple[Atom, ...]:
        return self.hypotheses + self.nondegeneracy

    def formula(self) -> tptp.Formula:
        # nondegeneracy conditions travel as separate hypothesis units
        if not self.goals:
            raise tptp.UnsupportedConstruct("a conjecture needs at least one goal")
        goal = tptp.conj(self.goals)
        if not self.hypotheses:
            return goal
        return tptp.Implies(tptp.conj(self.hypotheses), goal)

    def unit(self) -> tptp.FofAnnotated:
        return tptp.FofAnnotated(self.name, "conjecture", self.formula())

    def ndg_units(self) -> list[tptp.FofAnnotated]:
        return [tptp.FofAnnotated(f"ndg_{self.name}_{i}", "hypothesis", a)
                for i, a in enumerate(self.nondegeneracy)]


@dataclass(frozen=True)
class ProofTask:
    name: str
    hypotheses: tuple[Atom, ...]
    facts: tuple[Atom, ...]            # KB ground facts
    axioms: tuple[CoherentRule, ...]
    goal: Atom
    fact_names: tuple[str, ...] = ()

    def constants(self) -> set[str]:
        out = {x for a in self.hypotheses + self.facts + (self.goal,) for x in a.args}
        for r in self.axioms:
            out |= r.constants()
        return out

    def sorts(self, known: dict[str, Sort] | None = None) -> dict[str, Sort]:
        atoms = list(self.facts) + list(self.hypotheses) + [self.goal]
        return {k: v for k, v in infer_sorts(atoms, known or {}).items() if v is not None}


def primed(const: str) -> str:
    return _SIDE_PRIMED.get(const, const + "1")


def plan_naming(plan: ConstructionPlan) -> dict[str, str]:
    """Plan object name -> conjecture constant."""
    naming = {}
    for lab, const in plan.given.items():
        naming[lab] = const if lab in VERTICES else primed(const)
    for st in plan.steps:
        for out, intent in zip(st.outputs, st.intent):
            if intent is None:
                raise UnmappedObject(f"{out} has no significant-object interpretation")
            naming[out] = intent if intent in _VERTEX_CONSTS else primed(intent)
    return naming


def _ratio_atom(a: str, b: str, p: str, n: int, d: int) -> Atom:
    # vec(a,b) : vec(a,p) = n : d
    if (n, d) == (1, 3):
        return atom("ratio23", p, b, p, a)
    if f"ratio{n}{d}" in ("ratio12", "ratio13", "ratio21", "ratio23"):
        return atom(f"ratio{n}{d}", a, b, a, p)
    if f"ratio{d}{n}" in ("ratio12", "ratio13", "ratio21", "ratio23"):
        return atom(f"ratio{d}{n}", a, p, a, b)
    raise UnmappedObject(f"ratio {n}:{d} has no predicate")


def conjecture_name(plan: ConstructionPlan) -> str:
    return "th_" + "_".join(plan.given)


def conjecture_from_plan(plan: ConstructionPlan, kb: KnowledgeBase | None = None) -> Conjecture:
    nm = plan_naming(plan)
    hyps: list[Atom] = []
    ndg: list[Atom] = []
    points = [nm[g] for g in plan.given]        # point constants known so far
    sorts = plan.sorts()
    for st in plan.steps:
        x = [nm[i] for i in st.inputs]
        y = [nm[o] for o in st.outputs]
        if st.kind == "LineThrough":
            hyps += [atom("inc", x[0], y[0]), atom("inc", x[1], y[0])]
            ndg.append(neq(x[0], x[1]))
        elif st.kind == "PerpThrough":
            hyps += [atom("perp", x[0], y[0]), atom("inc", x[1], y[0])]
        elif st.kind == "CircleCentered":
            hyps += [atom("inc_c", x[1], y[0]), atom("center", x[0], y[0])]
        elif st.kind == "IntersectLines":
            hyps += [atom("inc", y[0], x[0]), atom("inc", y[0], x[1])]
        elif st.kind == "IntersectLineCircle":
            for p in y:
                hyps += [atom("inc_c", p, x[1]), atom("inc", p, x[0])]
        elif st.kind == "RatioPoint":
            hyps.append(_ratio_atom(x[0], x[1], y[0], *st.params))
            ndg += [neq(g, y[0]) for g in points if g != y[0]]
        points += [nm[o] for o in st.outputs if sorts[o] == Sort.POINT]
    goals = tuple(eq(plan.given[g], nm[g]) for g in plan.given if g not in VERTICES)
    return Conjecture(conjecture_name(plan), tuple(dict.fromkeys(hyps)), tuple(dict.fromkeys(ndg)),
                      goals, nm)


def split_goals(c: Conjecture, kb: KnowledgeBase, select: bool = True) -> list["ProofTask"]:
    tasks = []
    for i, g in enumerate(c.goals):
        base = ProofTask(f"{c.name}{i}", c.premises(), kb.facts, kb.rules, g, tuple(kb.fact_names()))
        if select:
            base = ProofTask(base.name, base.hypotheses, base.facts, tuple(select_axioms(base, kb)),
                             g, base.fact_names)
        tasks.append(base)
    return tasks


_ALWAYS = ("eq_sym", "eqnativeEqSub0")


def select_axioms(task: ProofTask, kb: KnowledgeBase, rounds: int = 2) -> list[CoherentRule]:
    """Relevance filter: rules sharing a predicate or a constant with the hypotheses,
    closed for ``rounds`` rounds, plus equality rules for every reachable predicate."""
    preds = {a.pred for a in task.hypotheses if a.pred != "eq"}
    consts = {x for a in task.hypotheses for x in a.args}
    chosen: set[str] = set()
    candidates = [r for r in kb.rules if "EqSub" not in r.name and r.name not in _ALWAYS]
    for _ in range(rounds):
        picked = [r for r in candidates if r.name not in chosen
                  and ((r.predicates() - {"eq"}) & preds or r.constants() & consts)]
        if not picked:
            break
        for r in picked:
            chosen.add(r.name)
            preds |= r.predicates() - {"eq"}
            consts |= r.constants()
    out = []
    for r in kb.rules:
        if r.name in chosen or r.name in _ALWAYS:
            out.append(r)
        elif "EqSub" in r.name and r.name.split("EqSub")[0] in preds:
            out.append(r)
    return out


def task_units(task: ProofTask) -> list[tptp.FofAnnotated]:
    units = [tptp.FofAnnotated(n, "axiom", a) for n, a in zip(task.fact_names, task.facts)]
    units += [tptp.rule_unit(r) for r in task.axioms]
    hyp = tptp.conj(task.hypotheses) if task.hypotheses else None
    f = tptp.Implies(hyp, task.goal) if hyp is not None else task.goal
    units.append(tptp.FofAnnotated(task.name, "conjecture", f))
    return units


def export_problem(plan: ConstructionPlan, kb: KnowledgeBase) -> str:
    """Axioms relevant to any goal plus the single conjecture, as TPTP text."""
    c = conjecture_from_plan(plan, kb)
    names: set[str] = set()
    for t in split_goals(c, kb):
        names |= {r.name for r in t.axioms}
    units = [tptp.FofAnnotated(n, "axiom", a) for n, a in zip(kb.fact_names(), kb.facts)]
    units += [tptp.rule_unit(r) for r in kb.rules if r.name in names]
    units += c.ndg_units()
    if c.goals:
        units.append(c.unit())
    return tptp.serialize(units)


def describe_objects(c: Conjecture) -> dict[str, str]:
    """Constant -> plan label, for readable reports."""
    return {v: k for k, v in c.naming.items()}
