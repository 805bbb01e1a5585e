"""The instantiated triangle knowledge base, the problem corpus and numeric KB validation."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import tptp
from .plan import LABEL_TO_CONST, POINT_LABELS
from .terms import (SIGNATURE, Atom, CoherentRule, Kind, ObjectId, Sort, atom, eq, fact_name,
                    infer_sorts, is_var, make_rule, neq)

POINTS = tuple(LABEL_TO_CONST[lab] for lab in POINT_LABELS)
LINES = ("bc", "ca", "ab", "ha", "hb", "hc", "bisa", "bisb", "bisc", "ma_med", "mb_med", "mc_med")
CIRCLES = ("cc",)

# one step of the cyclic relabelling A -> B -> C -> A
_ROT = {
    "pA": "pB", "pB": "pC", "pC": "pA",
    "pMa": "pMb", "pMb": "pMc", "pMc": "pMa",
    "pHa": "pHb", "pHb": "pHc", "pHc": "pHa",
    "bc": "ca", "ca": "ab", "ab": "bc",
    "ha": "hb", "hb": "hc", "hc": "ha",
    "bisa": "bisb", "bisb": "bisc", "bisc": "bisa",
    "ma_med": "mb_med", "mb_med": "mc_med", "mc_med": "ma_med",
}


def rotate(name: str, k: int = 1) -> str:
    for _ in range(k % 3):
        name = _ROT.get(name, name)
    return name


def _rot_atom(a: Atom, k: int) -> Atom:
    return Atom(a.pred, tuple(rotate(x, k) for x in a.args))


def _rot_rule(r: CoherentRule, k: int, name: str) -> CoherentRule:
    return CoherentRule(
        name, r.universals, tuple(_rot_atom(a, k) for a in r.premises),
        tuple(type(b)(b.existentials, tuple(_rot_atom(a, k) for a in b.atoms)) for b in r.branches))


@dataclass(frozen=True)
class KnowledgeBase:
    objects: tuple[ObjectId, ...]
    facts: tuple[Atom, ...]
    rules: tuple[CoherentRule, ...]
    _by_name: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {r.name: r for r in self.rules})
        if len(self._by_name) != len(self.rules):
            raise ValueError("duplicate rule names")
        declared = {o.name for o in self.objects}
        if len(declared) != len(self.objects):
            raise ValueError("duplicate object names")
        for a in self.facts:
            missing = [x for x in a.args if x not in declared]
            if missing:
                raise ValueError(f"fact {a} uses undeclared {missing}")
        for r in self.rules:
            missing = r.constants() - declared
            if missing:
                raise ValueError(f"rule {r.name} uses undeclared {sorted(missing)}")

    def rule(self, name: str) -> CoherentRule:
        return self._by_name[name]

    def has_rule(self, name: str) -> bool:
        return name in self._by_name

    @property
    def sorts(self) -> dict[str, Sort]:
        return {o.name: o.sort for o in self.objects}

    def fact_names(self) -> list[str]:
        return [fact_name(a) for a in self.facts]

    def with_rules(self, extra: Iterable[CoherentRule]) -> "KnowledgeBase":
        return KnowledgeBase(self.objects, self.facts, self.rules + tuple(extra))


# ------------------------------------------------------------ congruence

_POS_VARS = ("A", "B", "C", "D")


def congruence_rules(signature: dict[str, tuple] = SIGNATURE) -> list[CoherentRule]:
    """Explicit equality axioms: eq_sym, eqnativeEqSub0 and one substitution rule per argument."""
    out = [
        make_rule("eq_sym", ("A", "B"), (eq("A", "B"),), (eq("B", "A"),)),
        make_rule("eqnativeEqSub0", ("A", "B", "X"), (eq("B", "A"), eq("A", "X")), (eq("X", "B"),)),
    ]
    for pred, sorts in signature.items():
        if pred == "eq":
            continue
        vs = _POS_VARS[:len(sorts)]
        for i in range(len(sorts)):
            new = list(vs)
            new[i] = "X"
            out.append(make_rule(f"{pred}EqSub{i}", vs + ("X",),
                                 (Atom(pred, vs), eq(vs[i], "X")), (Atom(pred, tuple(new)),)))
    return out


# ------------------------------------------------------------ the KB

def _triangle_facts() -> list[Atom]:
    base = [
        atom("inc", "pB", "bc"), atom("inc", "pC", "bc"),
        atom("inc", "pA", "ha"), atom("perp", "ha", "bc"),
        atom("inc", "pHa", "ha"), atom("inc", "pHa", "bc"), atom("inc", "pH", "ha"),
        atom("inc", "pMa", "bc"), atom("inc", "pMa", "bisa"), atom("inc", "pOc", "bisa"),
        atom("perp", "bisa", "bc"),
        atom("inc", "pA", "ma_med"), atom("inc", "pMa", "ma_med"), atom("inc", "pG", "ma_med"),
        atom("inc_c", "pA", "cc"),
        atom("ratio23", "pA", "pG", "pA", "pMa"),
        atom("ratio12", "pB", "pMa", "pB", "pC"),
    ]
    facts = [_rot_atom(a, k) for k in range(3) for a in base]
    facts += [atom("center", "pOc", "cc"), atom("ratio13", "pOc", "pG", "pOc", "pH")]
    # generic non-degeneracy: all named points and all named lines are pairwise distinct
    for group in (POINTS, LINES):
        for x, y in itertools.permutations(group, 2):
            facts.append(neq(x, y))
    return facts


def _instantiated_rules() -> list[CoherentRule]:
    out = []
    for k, (v, s, side) in enumerate(zip("ABC", "abc", ("bc", "ca", "ab"))):
        templates = [
            (f"{side}_unique", make_rule("bc_unique", ("L",),
                                         (atom("inc", "pB", "L"), atom("inc", "pC", "L")), (eq("L", "bc"),))),
            (f"h{s}{v}", make_rule("haA", ("H",),
                                   (atom("perp", "H", "bc"), atom("inc", "pA", "H")), (eq("ha", "H"),))),
            (f"pH{s}_def", make_rule("pHa_def", ("H1",),
                                     (atom("inc", "H1", "ha"), atom("inc", "H1", "bc")), (eq("H1", "pHa"),))),
            (f"pM{s}_is_interect_bis{s}_{side}",
             make_rule("pMa_is_interect_bisa_bc", ("P",),
                       (atom("inc", "P", "bc"), atom("inc", "P", "bisa")), (eq("P", "pMa"),))),
            (f"ratio23_M{s}_Gsat0", make_rule("ratio23_Ma_Gsat0", ("X",),
                                               (atom("ratio23", "pA", "X", "pA", "pMa"),), (eq("pG", "X"),))),
            (f"pM{s}_midpoint", make_rule("pMa_midpoint", ("X",),
                                          (atom("ratio12", "pB", "X", "pB", "pC"),), (eq("pMa", "X"),))),
        ]
        out += [_rot_rule(r, k, name) for name, r in templates]
    out += [
        make_rule("cc_unique", ("C",),
                  (atom("inc_c", "pA", "C"), atom("inc_c", "pB", "C"), atom("inc_c", "pC", "C")),
                  (eq("C", "cc"),)),
        make_rule("center_unique", ("C", "C1", "C2"),
                  (atom("center", "C1", "C"), atom("center", "C2", "C")), (eq("C1", "C2"),)),
        make_rule("perp_unique", ("P", "L", "L1", "L2"),
                  (atom("perp", "L1", "L"), atom("inc", "P", "L1"), atom("perp", "L2", "L"),
                   atom("inc", "P", "L2")), (eq("L1", "L2"),)),
    ]
    return _order_by_template(out)


def _order_by_template(rules: list[CoherentRule]) -> list[CoherentRule]:
    # keep the A/B/C variants of each template together
    per = len(rules[:-3]) // 3
    grouped = [rules[k * per + i] for i in range(per) for k in range(3)]
    return grouped + rules[-3:]


def _general_rules() -> list[CoherentRule]:
    R = make_rule
    out = [
        R("perp_sym", ("L1", "L2"), (atom("perp", "L1", "L2"),), (atom("perp", "L2", "L1"),)),
        R("para_sym", ("L1", "L2"), (atom("para", "L1", "L2"),), (atom("para", "L2", "L1"),)),
        R("neq_sym", ("A", "B"), (neq("A", "B"),), (neq("B", "A"),)),
        R("inc_line", ("P1", "P2", "L"),
          (atom("inc", "P1", "L"), atom("inc", "P2", "L"), neq("P1", "P2")), (atom("line", "P1", "P2", "L"),)),
        R("line_inc", ("P1", "P2", "L"), (atom("line", "P1", "P2", "L"),),
          (atom("inc", "P1", "L"), atom("inc", "P2", "L"))),
        R("ex_line", ("P1", "P2"), (neq("P1", "P2"),), (atom("line", "P1", "P2", "L"),), ("L",)),
        R("line_unique", ("P1", "P2", "L1", "L2"),
          (atom("line", "P1", "P2", "L1"), atom("line", "P1", "P2", "L2")), (eq("L1", "L2"),)),
        R("meet_unique", ("P", "Q", "L1", "L2"),
          (atom("inc", "P", "L1"), atom("inc", "P", "L2"), atom("inc", "Q", "L1"), atom("inc", "Q", "L2"),
           neq("L1", "L2")), (eq("P", "Q"),)),
        R("ratio21_para", ("A", "G", "Ma", "H", "Oc", "Lba", "Lha"),
          (atom("ratio21", "A", "G", "G", "Ma"), atom("ratio21", "H", "G", "G", "Oc"),
           atom("line", "Oc", "Ma", "Lba"), atom("line", "A", "H", "Lha")), (atom("para", "Lba", "Lha"),)),
        R("perp_para", ("Lba", "Lha", "A"),
          (atom("perp", "Lha", "A"), atom("para", "Lba", "Lha")), (atom("perp", "Lba", "A"),)),
        R("perp_perp_para", ("L1", "L2", "L"),
          (atom("perp", "L1", "L"), atom("perp", "L2", "L")), (atom("para", "L1", "L2"),)),
        R("para_inc_eq", ("P", "L1", "L2"),
          (atom("para", "L1", "L2"), atom("inc", "P", "L1"), atom("inc", "P", "L2")), (eq("L1", "L2"),)),
        R("circle_unique", ("O", "P", "C1", "C2"),
          (atom("center", "O", "C1"), atom("inc_c", "P", "C1"), atom("center", "O", "C2"),
           atom("inc_c", "P", "C2")), (eq("C1", "C2"),)),
    ]
    return out


def _ratio_rules() -> list[CoherentRule]:
    R = make_rule
    r = lambda p, *xs: atom(p, *xs)  # noqa: E731
    out = [
        R("ratio13_12", ("A", "B", "C"), (r("ratio13", "A", "B", "A", "C"),), (r("ratio12", "A", "B", "B", "C"),)),
        R("ratio12_13", ("A", "B", "C"), (r("ratio12", "A", "B", "B", "C"),), (r("ratio13", "A", "B", "A", "C"),)),
        R("ratio23_21", ("A", "B", "C"), (r("ratio23", "A", "B", "A", "C"),), (r("ratio21", "A", "B", "B", "C"),)),
        R("ratio21_23", ("A", "B", "C"), (r("ratio21", "A", "B", "B", "C"),), (r("ratio23", "A", "B", "A", "C"),)),
        R("ratio13_23", ("A", "B", "C"), (r("ratio13", "A", "B", "A", "C"),), (r("ratio23", "C", "B", "C", "A"),)),
        R("ratio23_13", ("A", "B", "C"), (r("ratio23", "A", "B", "A", "C"),), (r("ratio13", "C", "B", "C", "A"),)),
        R("ratio12_sym", ("A", "B", "C"), (r("ratio12", "A", "B", "A", "C"),), (r("ratio12", "C", "B", "C", "A"),)),
        R("ratio12_21", ("A", "B", "C", "D"), (r("ratio12", "A", "B", "C", "D"),), (r("ratio21", "C", "D", "A", "B"),)),
        R("ratio21_12", ("A", "B", "C", "D"), (r("ratio21", "A", "B", "C", "D"),), (r("ratio12", "C", "D", "A", "B"),)),
    ]
    for p in ("ratio12", "ratio13", "ratio21", "ratio23"):
        out.append(R(f"{p}_rev", ("A", "B", "C", "D"), (r(p, "A", "B", "C", "D"),), (r(p, "B", "A", "D", "C"),)))
    for p in ("ratio12", "ratio13", "ratio21", "ratio23"):
        base = ("A", "B", "C", "D")
        for i in range(4):
            other = list(base)
            other[i] = "X"
            out.append(R(f"{p}_unique{i}", base + ("X",), (r(p, *base), r(p, *other)), (eq(base[i], "X"),)))
        out.append(R(f"{p}_unique_base", ("A", "B", "C", "X"),
                     (r(p, "A", "B", "A", "C"), r(p, "X", "B", "X", "C")), (eq("A", "X"),)))
        # a ratio relation between three points makes them collinear
        out.append(R(f"{p}_col1", ("A", "B", "C", "L"),
                     (r(p, "A", "B", "A", "C"), atom("inc", "A", "L"), atom("inc", "C", "L")), (atom("inc", "B", "L"),)))
        out.append(R(f"{p}_col2", ("A", "B", "C", "L"),
                     (r(p, "A", "B", "A", "C"), atom("inc", "A", "L"), atom("inc", "B", "L")), (atom("inc", "C", "L"),)))
        out.append(R(f"{p}_col0", ("A", "B", "C", "L"),
                     (r(p, "A", "B", "A", "C"), atom("inc", "B", "L"), atom("inc", "C", "L")), (atom("inc", "A", "L"),)))
    return out


def standard_kb() -> KnowledgeBase:
    objects = tuple([ObjectId(n, Sort.POINT, Kind.SIGNIFICANT) for n in POINTS]
                    + [ObjectId(n, Sort.LINE, Kind.SIGNIFICANT) for n in LINES]
                    + [ObjectId(n, Sort.CIRCLE, Kind.SIGNIFICANT) for n in CIRCLES])
    rules = _instantiated_rules() + _general_rules() + _ratio_rules() + congruence_rules()
    return KnowledgeBase(objects, tuple(_triangle_facts()), tuple(rules))


# ------------------------------------------------------------ dump / load

def dump_kb(kb: KnowledgeBase) -> str:
    units = [tptp.FofAnnotated(fact_name(a), "axiom", a) for a in kb.facts]
    units += [tptp.rule_unit(r) for r in kb.rules]
    return tptp.serialize(units)


def load_kb(text: str) -> KnowledgeBase:
    facts, rules = [], []
    for u in tptp.parse(text):
        if u.role != "axiom":
            raise tptp.UnsupportedConstruct(f"{u.name}: only axioms belong in a KB file")
        if isinstance(u.formula, Atom) and u.formula.is_ground:
            facts.append(u.formula)
        else:
            rules.append(tptp.formula_rule(u.name, u.formula))
    names = {x for a in facts for x in a.args}
    for r in rules:
        names |= r.constants()
    sorts = standard_sorts()
    sorts.update({k: v for k, v in infer_sorts(facts).items() if v is not None and k not in sorts})
    objects = []
    for n in sorted(names, key=_object_order):
        s = sorts.get(n) or _sort_from_rules(n, rules)
        objects.append(ObjectId(n, s, Kind.SIGNIFICANT))
    return KnowledgeBase(tuple(objects), tuple(facts), tuple(rules))


def _sort_from_rules(name: str, rules) -> Sort:
    for r in rules:
        for a in r.premises + tuple(x for b in r.branches for x in b.atoms):
            for x, s in zip(a.args, SIGNATURE[a.pred]):
                if x == name and s is not None:
                    return s
    raise ValueError(f"cannot determine the sort of {name}")


def standard_sorts() -> dict[str, Sort]:
    out = {n: Sort.POINT for n in POINTS}
    out.update({n: Sort.LINE for n in LINES})
    out.update({n: Sort.CIRCLE for n in CIRCLES})
    return out


_ORDER = {n: i for i, n in enumerate(POINTS + LINES + CIRCLES)}


def _object_order(name: str):
    return (_ORDER.get(name, len(_ORDER)), name)


# ------------------------------------------------------------ corpus

# index permutations of the 12 labels induced by relabelling the vertices
def _label_perm(vperm: Sequence[int]) -> tuple[int, ...]:
    idx = {lab: i for i, lab in enumerate(POINT_LABELS)}
    out = []
    for lab in POINT_LABELS:
        if lab in ("O", "G", "H"):
            out.append(idx[lab])
            continue
        letter = lab[-1].upper()
        k = "ABC".index(letter)
        new = "ABC"[vperm[k]]
        out.append(idx[new if len(lab) == 1 else lab[0] + new.lower()])
    return tuple(out)


S3 = tuple(_label_perm(p) for p in itertools.permutations(range(3)))


@dataclass(frozen=True, order=True)
class ProblemSpec:
    given_points: tuple[str, ...]   # labels in canonical order

    def __post_init__(self):
        if len(self.given_points) != 3 or len(set(self.given_points)) != 3:
            raise ValueError("a problem has three distinct given points")
        for p in self.given_points:
            if p not in POINT_LABELS:
                raise ValueError(f"unknown significant point {p!r}")
        ordered = tuple(sorted(self.given_points, key=POINT_LABELS.index))
        object.__setattr__(self, "given_points", ordered)

    @property
    def name(self) -> str:
        return "_".join(self.given_points)

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(LABEL_TO_CONST[p] for p in self.given_points)


def canonicalize(points: Iterable[str]) -> ProblemSpec:
    """Lexicographically least index triple over the S3 orbit."""
    idx = [POINT_LABELS.index(p) for p in points]
    best = min(tuple(sorted(perm[i] for i in idx)) for perm in S3)
    return ProblemSpec(tuple(POINT_LABELS[i] for i in best))


_PROBE = (np.array([0.31, 0.17]), np.array([5.23, -0.41]), np.array([1.87, 4.66]))


def determination_rank(labels: Sequence[str], h: float = 1e-6) -> int:
    """Rank of d(given points)/d(A,B,C) at a fixed generic triangle."""
    from .oracle import significant_points

    x0 = np.concatenate(_PROBE)

    def f(x):
        pts = significant_points(x[0:2], x[2:4], x[4:6])
        return np.concatenate([pts[lab] for lab in labels])

    jac = np.empty((2 * len(labels), 6))
    for j in range(6):
        e = np.zeros(6)
        e[j] = h
        jac[:, j] = (f(x0 + e) - f(x0 - e)) / (2 * h)
    sv = np.linalg.svd(jac, compute_uv=False)
    return int(np.sum(sv > 1e-6 * sv[0]))


def enumerate_corpus() -> list[ProblemSpec]:
    """Non-isomorphic location problems with at most one vertex among the givens
    whose given points determine the triangle."""
    seen = set()
    out = []
    for triple in itertools.combinations(POINT_LABELS, 3):
        spec = canonicalize(triple)
        if spec in seen:
            continue
        seen.add(spec)
        if sum(p in ("A", "B", "C") for p in spec.given_points) > 1:
            continue
        if determination_rank(spec.given_points) < 6:
            continue
        out.append(spec)
    return sorted(out, key=lambda s: [POINT_LABELS.index(p) for p in s.given_points])


# ------------------------------------------------------------ validation

@dataclass
class RuleFailure:
    rule: str
    trial: int
    seed: int
    binding: dict[str, str]


@dataclass
class ValidationReport:
    trials: int
    checked: dict[str, int]            # rule -> number of premise matches examined
    failures: list[RuleFailure]

    @property
    def ok(self) -> bool:
        return not self.failures

    def failed_rules(self) -> list[str]:
        return sorted({f.rule for f in self.failures})

    def format(self) -> str:
        rows = [f"{'rule':<34}{'matches':>9}  status"]
        bad = {f.rule: f for f in self.failures}
        for name, n in self.checked.items():
            status = "ok" if name not in bad else "FAIL"
            rows.append(f"{name:<34}{n:>9}  {status}")
        for f in self.failures:
            inst = ", ".join(f"{k} -> {v}" for k, v in f.binding.items())
            rows.append(f"counterexample for {f.rule}: trial {f.trial} seed {f.seed}: {inst}")
        rows.append(f"{len(self.checked) - len(bad)}/{len(self.checked)} rules pass over {self.trials} diagrams")
        return "\n".join(rows) + "\n"


def validate_kb(kb: KnowledgeBase, trials: int = 100, seed: int = 7,
                tol: float = 1e-7) -> ValidationReport:
    from .model import Model
    from .oracle import sample_triangle

    if trials < 1:
        raise ValueError("trials must be at least 1")
    checked = {r.name: 0 for r in kb.rules}
    checked.update({fact_name(a): 0 for a in kb.facts})
    failures: list[RuleFailure] = []
    failed = set()
    for t in range(trials):
        s = seed + t
        model = Model(sample_triangle(s), tol, auxiliary=True)
        for a in kb.facts:
            name = fact_name(a)
            checked[name] += 1
            if name not in failed and not model.holds(a):
                failed.add(name)
                failures.append(RuleFailure(name, t, s, {}))
        for r in kb.rules:
            if r.name in failed:
                continue
            n, bad = model.check_rule(r)
            checked[r.name] += n
            if bad is not None:
                failed.add(r.name)
                failures.append(RuleFailure(r.name, t, s, bad))
    return ValidationReport(trials, checked, failures)
