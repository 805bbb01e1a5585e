"""Forward search for ruler-and-compass constructions over a determination table."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .kb import CIRCLES, LINES, POINTS, KnowledgeBase, ProblemSpec, standard_kb
from .plan import CONST_TO_LABEL, LABEL_TO_CONST, VERTICES, ConstructionPlan, ConstructionStep
from .terms import Atom

_RATIO_VALUE = {"ratio12": Fraction(1, 2), "ratio13": Fraction(1, 3),
                "ratio21": Fraction(2), "ratio23": Fraction(2, 3)}
# (n, d) pairs tried in order; RatioPoint(a, b, n, d) lies at a + (d/n)(b - a)
_RATIO_TERMS = [(n, d) for n in (1, 2, 3) for d in (1, 2, 3) if n != d]


@dataclass(frozen=True)
class SearchLimits:
    max_steps: int = 12
    max_rounds: int = 32
    max_nodes: int = 10_000


@dataclass(frozen=True)
class Unsolved:
    reason: str      # "NoDetermination" | "BudgetExhausted"
    detail: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class _Derivation:
    kind: str
    inputs: tuple[str, ...]          # KB constants
    outputs: tuple[str, ...]
    params: tuple[int, ...] = ()


class DeterminationTable:
    """Construction knowledge distilled from the KB's ground facts."""

    def __init__(self, kb: KnowledgeBase):
        self.on_line: dict[str, list[str]] = {l: [] for l in LINES}
        self.on_circle: dict[str, list[str]] = {c: [] for c in CIRCLES}
        self.center: dict[str, str] = {}
        self.perp: list[tuple[str, str]] = []
        self.triples: list[tuple[tuple[str, Fraction], ...]] = []
        for a in kb.facts:
            if a.pred == "inc" and a.args[1] in self.on_line:
                self.on_line[a.args[1]].append(a.args[0])
            elif a.pred == "inc_c" and a.args[1] in self.on_circle:
                self.on_circle[a.args[1]].append(a.args[0])
            elif a.pred == "center":
                self.center[a.args[1]] = a.args[0]
            elif a.pred == "perp":
                self.perp.append(a.args)
            elif a.pred in _RATIO_VALUE:
                t = self._triple(a)
                if t is not None:
                    self.triples.append(t)
        order = {p: i for i, p in enumerate(POINTS)}
        for pts in list(self.on_line.values()) + list(self.on_circle.values()):
            pts.sort(key=order.__getitem__)
        # lines perpendicular to a common line are parallel
        self.parallel: set[frozenset] = set()
        for (x1, y1), (x2, y2) in itertools.combinations(self.perp, 2):
            if y1 == y2 and x1 != x2:
                self.parallel.add(frozenset((x1, x2)))

    @staticmethod
    def _triple(a: Atom):
        x, y, x2, z = a.args
        if x != x2:
            return None
        # ratioNM(X, Y, X, Z): Y = X + (N/M)(Z - X)
        return ((x, Fraction(0)), (y, _RATIO_VALUE[a.pred]), (z, Fraction(1)))

    def lines_through(self, p: str) -> list[str]:
        return [l for l in LINES if p in self.on_line[l]]


def _ratio_terms(t: Fraction) -> tuple[int, int] | None:
    for n, d in _RATIO_TERMS:
        if Fraction(d, n) == t:
            return n, d
    return None


def _derive_round(table: DeterminationTable, known: set[str]) -> list[_Derivation]:
    """All derivations enabled by ``known``, in priority order."""
    out: list[_Derivation] = []
    for l in LINES:
        if l not in known:
            pts = [p for p in table.on_line[l] if p in known]
            if len(pts) >= 2:
                out.append(_Derivation("LineThrough", (pts[0], pts[1]), (l,)))
    for x, y in table.perp:
        for base, new in ((x, y), (y, x)):
            if base in known and new not in known:
                pts = [p for p in table.on_line[new] if p in known]
                if pts:
                    out.append(_Derivation("PerpThrough", (base, pts[0]), (new,)))
    for c in CIRCLES:
        o = table.center.get(c)
        if c not in known and o in known:
            pts = [p for p in table.on_circle[c] if p in known]
            if pts:
                out.append(_Derivation("CircleCentered", (o, pts[0]), (c,)))
    for triple in table.triples:
        unknown = [(p, t) for p, t in triple if p not in known]
        if len(unknown) != 1:
            continue
        target, tt = unknown[0]
        ks = [(p, t) for p, t in triple if p in known]
        for (a, ta), (b, tb) in (ks, ks[::-1]):
            terms = _ratio_terms((tt - ta) / (tb - ta))
            if terms:
                out.append(_Derivation("RatioPoint", (a, b), (target,), terms))
                break
    for p in POINTS:
        if p in known:
            continue
        lines = [l for l in table.lines_through(p) if l in known]
        for l1, l2 in itertools.combinations(lines, 2):
            if frozenset((l1, l2)) not in table.parallel:
                out.append(_Derivation("IntersectLines", (l1, l2), (p,)))
                break
    for c in CIRCLES:
        if c not in known:
            continue
        for l in LINES:
            if l not in known:
                continue
            common = [p for p in table.on_line[l] if p in table.on_circle[c]]
            if len(common) == 2 and not any(p in known for p in common):
                out.append(_Derivation("IntersectLineCircle", (l, c), tuple(common)))
    return out


def solve(problem: ProblemSpec, kb: KnowledgeBase | None = None,
          limits: SearchLimits = SearchLimits()) -> ConstructionPlan | Unsolved:
    kb = kb or standard_kb()
    table = DeterminationTable(kb)
    given = {lab: LABEL_TO_CONST[lab] for lab in problem.given_points}
    known = set(given.values())
    producer: dict[str, _Derivation] = {}
    targets = {LABEL_TO_CONST[v] for v in VERTICES}
    nodes = 0
    for _ in range(limits.max_rounds):
        if targets <= known:
            break
        fresh = []
        for der in _derive_round(table, known):
            nodes += 1
            if nodes > limits.max_nodes:
                return Unsolved("BudgetExhausted", f"more than {limits.max_nodes} search nodes")
            if any(o in known or o in producer for o in der.outputs):
                continue
            for o in der.outputs:
                producer[o] = der
            fresh.extend(der.outputs)
        if not fresh:
            missing = ", ".join(CONST_TO_LABEL[t] for t in sorted(targets - known))
            return Unsolved("NoDetermination", f"cannot determine {missing}")
        known.update(fresh)
    else:
        if not targets <= known:
            return Unsolved("BudgetExhausted", f"more than {limits.max_rounds} rounds")
    plan = _extract(given, producer)
    if len(plan.steps) > limits.max_steps:
        return Unsolved("BudgetExhausted", f"plan needs {len(plan.steps)} steps")
    return plan


_SORT_RANK = {**{p: 0 for p in POINTS}, **{l: 1 for l in LINES}, **{c: 2 for c in CIRCLES}}


def _extract(given: dict[str, str], producer: dict[str, _Derivation]) -> ConstructionPlan:
    order: list[_Derivation] = []
    seen: set[int] = set()
    given_consts = set(given.values())

    def visit(obj: str):
        if obj in given_consts:
            return
        der = producer[obj]
        if id(der) in seen:
            return
        seen.add(id(der))
        for x in sorted(der.inputs, key=lambda c: _SORT_RANK[c]):
            visit(x)
        order.append(der)

    for v in VERTICES:
        visit(LABEL_TO_CONST[v])

    names = {const: lab for lab, const in given.items()}
    counters = {0: 0, 1: 0, 2: 0}
    steps = []
    for der in order:
        outs = []
        for o in der.outputs:
            if o in CONST_TO_LABEL and CONST_TO_LABEL[o] in VERTICES:
                names[o] = CONST_TO_LABEL[o]
            else:
                rank = _SORT_RANK[o]
                counters[rank] += 1
                k = counters[rank]
                prefix = ("P", "l", "c")[rank]
                names[o] = prefix if (rank == 2 and k == 1) else f"{prefix}{k}"
            outs.append(names[o])
        steps.append(ConstructionStep(der.kind, tuple(names[i] for i in der.inputs), tuple(outs),
                                      der.params, der.outputs))
    outputs = {v: names[LABEL_TO_CONST[v]] for v in VERTICES}
    plan = ConstructionPlan(dict(given), steps, outputs)
    plan.validate()
    return plan


def explain_plan(plan: ConstructionPlan) -> str:
    if not plan.steps:
        return "Points " + ", ".join(VERTICES) + " are given."
    lines = []
    for i, st in enumerate(plan.steps, 1):
        x = st.inputs
        if st.kind == "LineThrough":
            text = f"Construct the line {st.outputs[0]} = {x[0]}{x[1]}."
        elif st.kind == "PerpThrough":
            text = (f"Construct the line {st.outputs[0]} such that it is perpendicular to the line "
                    f"{x[0]} and that it contains {x[1]}.")
        elif st.kind == "CircleCentered":
            text = f"Construct the circle {st.outputs[0]} centered at {x[0]} containing {x[1]}."
        elif st.kind == "IntersectLines":
            text = f"Let {st.outputs[0]} be the intersection of the lines {x[0]} and {x[1]}."
        elif st.kind == "IntersectLineCircle":
            text = (f"Let {st.outputs[0]} and {st.outputs[1]} be the intersections of the line "
                    f"{x[0]} and the circle {x[1]}.")
        else:
            n, d = st.params
            text = f"Construct the point {st.outputs[0]} such that {x[0]}{x[1]} : {x[0]}{st.outputs[0]} = {n}:{d}."
        lines.append(f"{i}. {text}")
    return "\n".join(lines)
