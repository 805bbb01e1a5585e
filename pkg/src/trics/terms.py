"""Sorted first-order vocabulary: sorts, objects, atoms and coherent rules."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class Sort(enum.Enum):
    POINT = "point"
    LINE = "line"
    CIRCLE = "circle"


class Kind(enum.Enum):
    GIVEN = "given"
    SIGNIFICANT = "significant"
    WITNESS = "witness"


@dataclass(frozen=True)
class ObjectId:
    name: str
    sort: Sort
    kind: Kind = Kind.SIGNIFICANT


P, L, C = Sort.POINT, Sort.LINE, Sort.CIRCLE

# None marks the polymorphic equality positions (both sides share one sort).
SIGNATURE: dict[str, tuple[Sort | None, ...]] = {
    "inc": (P, L),
    "inc_c": (P, C),
    "center": (P, C),
    "perp": (L, L),
    "para": (L, L),
    "line": (P, P, L),
    "ratio12": (P, P, P, P),
    "ratio13": (P, P, P, P),
    "ratio21": (P, P, P, P),
    "ratio23": (P, P, P, P),
    "eq": (None, None),
    "neq": (None, None),
}

RATIO_PREDICATES = ("ratio12", "ratio13", "ratio21", "ratio23")


def is_var(name: str) -> bool:
    return name[:1].isupper()


class SortError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Atom:
    pred: str
    args: tuple[str, ...]

    def __post_init__(self):
        sig = SIGNATURE.get(self.pred)
        if sig is None:
            raise SortError(f"unknown predicate {self.pred!r}")
        if len(sig) != len(self.args):
            raise SortError(f"{self.pred} expects {len(sig)} arguments, got {len(self.args)}")

    @property
    def is_ground(self) -> bool:
        return not any(is_var(a) for a in self.args)

    @property
    def is_equality(self) -> bool:
        return self.pred == "eq"

    def substitute(self, binding: Mapping[str, str]) -> Atom:
        return Atom(self.pred, tuple(binding.get(a, a) for a in self.args))

    def mirrored(self) -> Atom:
        """The same (dis)equality with sides swapped."""
        assert self.pred in ("eq", "neq")
        return Atom(self.pred, (self.args[1], self.args[0]))

    def __str__(self) -> str:
        if self.pred == "eq":
            return f"{self.args[0]} = {self.args[1]}"
        if self.pred == "neq":
            return f"{self.args[0]} != {self.args[1]}"
        return f"{self.pred}({', '.join(self.args)})"


def eq(a: str, b: str) -> Atom:
    return Atom("eq", (a, b))


def neq(a: str, b: str) -> Atom:
    return Atom("neq", (a, b))


def atom(pred: str, *args: str) -> Atom:
    return Atom(pred, tuple(args))


def parse_atom(text: str) -> Atom:
    """Parse the readable form produced by ``str(Atom)``."""
    text = text.strip()
    for op, pred in ((" != ", "neq"), (" = ", "eq")):
        if op in text:
            left, right = text.split(op, 1)
            return Atom(pred, (left.strip(), right.strip()))
    if not text.endswith(")") or "(" not in text:
        raise ValueError(f"not an atom: {text!r}")
    name, rest = text.split("(", 1)
    args = tuple(a.strip() for a in rest[:-1].split(","))
    return Atom(name.strip(), args)


@dataclass(frozen=True)
class Branch:
    existentials: tuple[str, ...]
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class CoherentRule:
    """``forall universals. premises => branch_1 | ... | branch_k``."""

    name: str
    universals: tuple[str, ...]
    premises: tuple[Atom, ...]
    branches: tuple[Branch, ...]
    var_sorts: Mapping[str, Sort | None] = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not self.branches:
            raise ValueError(f"rule {self.name} has no conclusion")
        allowed = set(self.universals)
        for a in self.premises:
            for x in a.args:
                if is_var(x) and x not in allowed:
                    raise ValueError(f"rule {self.name}: premise variable {x} is not universal")
        for br in self.branches:
            if set(br.existentials) & allowed:
                raise ValueError(f"rule {self.name}: existential shadows a universal")
            scope = allowed | set(br.existentials)
            for a in br.atoms:
                for x in a.args:
                    if is_var(x) and x not in scope:
                        raise ValueError(f"rule {self.name}: unbound variable {x}")
        object.__setattr__(self, "var_sorts", infer_var_sorts(self))

    @property
    def is_existential(self) -> bool:
        return any(br.existentials for br in self.branches)

    @property
    def is_disjunctive(self) -> bool:
        return len(self.branches) > 1

    @property
    def is_fact(self) -> bool:
        return not self.premises and not self.universals and not self.is_existential

    def predicates(self) -> set[str]:
        preds = {a.pred for a in self.premises}
        for br in self.branches:
            preds |= {a.pred for a in br.atoms}
        return preds

    def constants(self) -> set[str]:
        out = {x for a in self.premises for x in a.args if not is_var(x)}
        for br in self.branches:
            out |= {x for a in br.atoms for x in a.args if not is_var(x)}
        return out


def _unify_sorts(atoms: Iterable[Atom], known: dict[str, Sort | None], where: str) -> dict[str, Sort | None]:
    # union-find over names linked by (dis)equality, then pin classes by predicate positions
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pinned: dict[str, Sort] = {}
    atoms = list(atoms)
    for a in atoms:
        for x in a.args:
            find(x)
        if a.pred in ("eq", "neq"):
            ra, rb = find(a.args[0]), find(a.args[1])
            if ra != rb:
                parent[ra] = rb
    for name, s in known.items():
        if s is not None and name in parent:
            pinned.setdefault(find(name), s)
    for a in atoms:
        for x, s in zip(a.args, SIGNATURE[a.pred]):
            if s is None:
                continue
            r = find(x)
            if pinned.setdefault(r, s) != s:
                raise SortError(f"{where}: {x} used as {pinned[r].value} and {s.value}")
    # a second pass catches classes pinned by `known` that clash with positions
    for name, s in known.items():
        if s is not None and name in parent and pinned.get(find(name), s) != s:
            raise SortError(f"{where}: {name} is a {s.value}")
    return {x: pinned.get(find(x)) for x in parent}


def infer_var_sorts(rule: CoherentRule) -> dict[str, Sort | None]:
    atoms = list(rule.premises)
    for br in rule.branches:
        atoms.extend(br.atoms)
    sorts = _unify_sorts(atoms, {}, f"rule {rule.name}")
    return {x: s for x, s in sorts.items() if is_var(x)}


def infer_sorts(atoms: Iterable[Atom], known: Mapping[str, Sort] | None = None) -> dict[str, Sort | None]:
    """Sorts of every name in ``atoms``; raises SortError on a clash."""
    return _unify_sorts(atoms, dict(known or {}), "atoms")


def well_sorted(a: Atom, sorts: Mapping[str, Sort]) -> bool:
    sig = SIGNATURE[a.pred]
    got = [sorts.get(x) for x in a.args]
    if any(s is None for s in got):
        return False
    if a.pred in ("eq", "neq"):
        return got[0] == got[1]
    return all(g == s for g, s in zip(got, sig))


def make_rule(name: str, universals: Iterable[str], premises: Iterable[Atom],
              conclusion: Iterable[Atom], existentials: Iterable[str] = ()) -> CoherentRule:
    return CoherentRule(name, tuple(universals), tuple(premises),
                        (Branch(tuple(existentials), tuple(conclusion)),))


def fact_name(a: Atom) -> str:
    return "_".join((a.pred,) + a.args)
