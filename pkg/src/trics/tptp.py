"""TPTP FOF fragment: formula AST, serializer and parser.

Formulas are built from ``terms.Atom`` leaves (``=`` and ``!=`` map to the
``eq``/``neq`` predicates), the connectives ``~ & | => <=>`` and the
quantifiers ``!`` and ``?``.  Sorts are by convention only: variables start
uppercase, constants lowercase.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .terms import Atom, Branch, CoherentRule, SIGNATURE, SortError, is_var


class UnsupportedConstruct(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line, self.col, self.expected, self.found = line, col, expected, found
        msg = f"{line}:{col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Iff, Forall, Exists]

ROLES = ("axiom", "conjecture", "hypothesis", "lemma")


@dataclass(frozen=True)
class FofAnnotated:
    name: str
    role: str
    formula: Formula


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        raise UnsupportedConstruct("empty conjunction")
    return parts[0] if len(parts) == 1 else And(parts)


# ---------------------------------------------------------------- serializer

def _atom_text(a: Atom) -> str:
    if a.pred == "eq":
        return f"{a.args[0]} = {a.args[1]}"
    if a.pred == "neq":
        return f"{a.args[0]} != {a.args[1]}"
    return f"{a.pred}({','.join(a.args)})"


def _operand(f: Formula) -> str:
    # quantified formulas are wrapped so a following connective cannot be absorbed
    text = format_formula(f)
    return f"({text})" if isinstance(f, (Forall, Exists)) else text


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return _atom_text(f)
    if isinstance(f, Not):
        return f"~ {_operand(f.arg)}"
    if isinstance(f, (And, Or)):
        if len(f.args) < 2:
            raise UnsupportedConstruct(f"{type(f).__name__} needs at least two operands")
        op = " & " if isinstance(f, And) else " | "
        return "(" + op.join(_operand(a) for a in f.args) + ")"
    if isinstance(f, Implies):
        return f"({_operand(f.left)} => {_operand(f.right)})"
    if isinstance(f, Iff):
        return f"({_operand(f.left)} <=> {_operand(f.right)})"
    if isinstance(f, (Forall, Exists)):
        if not f.vars:
            raise UnsupportedConstruct("quantifier without variables")
        q = "!" if isinstance(f, Forall) else "?"
        return f"{q} [{','.join(f.vars)}] : {format_formula(f.body)}"
    raise UnsupportedConstruct(f"not a formula: {f!r}")


def format_unit(u: FofAnnotated) -> str:
    if u.role not in ROLES:
        raise UnsupportedConstruct(f"role {u.role!r}")
    if not _NAME.fullmatch(u.name):
        raise UnsupportedConstruct(f"bad unit name {u.name!r}")
    return f"fof({u.name}, {u.role}, {format_formula(u.formula)})."


def serialize(units: Iterable[FofAnnotated]) -> str:
    lines = [format_unit(u) for u in units]
    return "".join(line + "\n" for line in lines)


# -------------------------------------------------------------------- lexer

_NAME = re.compile(r"[a-z][A-Za-z0-9_]*")
_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<op><=>|=>|<=|<~>|~\||~&|!=|[(),\[\]:.&|~!?=])
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<dollar>\$[a-z_]+)
  | (?P<other>.)
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        start = m.start()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, start - line_start + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            line_start = start + m.group().rfind("\n") + 1
    toks.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return toks


# ------------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: str):
        t = self.tok
        raise ParseError(t.line, t.col, expected, t.text or "end of input")

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            self.fail(repr(text) if text is not None else kind)
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind == "op"

    def units(self) -> list[FofAnnotated]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.unit())
        return out

    def unit(self) -> FofAnnotated:
        t = self.tok
        if t.kind != "lower" or t.text != "fof":
            if t.kind == "lower" and t.text in ("cnf", "tff", "thf", "include"):
                raise UnsupportedConstruct(f"{t.line}:{t.col}: {t.text} is outside the FOF fragment")
            self.fail("'fof'")
        self.i += 1
        self.take("(")
        name = self.take(kind="lower").text
        self.take(",")
        role_tok = self.tok
        role = self.take(kind="lower").text
        if role not in ROLES:
            raise ParseError(role_tok.line, role_tok.col, "a formula role", role)
        self.take(",")
        f = self.formula()
        self.take(")")
        self.take(".")
        return FofAnnotated(name, role, f)

    def formula(self) -> Formula:
        first = self.unitary()
        if self.at("&") or self.at("|"):
            op = self.tok.text
            parts = [first]
            while self.at(op):
                self.i += 1
                parts.append(self.unitary())
            if self.at("&") or self.at("|"):
                self.fail("matching connective (mixed & and | need parentheses)")
            return And(tuple(parts)) if op == "&" else Or(tuple(parts))
        if self.at("=>"):
            self.i += 1
            return Implies(first, self.unitary())
        if self.at("<=>"):
            self.i += 1
            return Iff(first, self.unitary())
        if self.tok.kind == "op" and self.tok.text in ("<=", "<~>", "~|", "~&"):
            t = self.tok
            raise UnsupportedConstruct(f"{t.line}:{t.col}: connective {t.text}")
        return first

    def unitary(self) -> Formula:
        if self.at("("):
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        if self.at("~"):
            self.i += 1
            return Not(self.unitary())
        if self.at("!") or self.at("?"):
            q = self.take().text
            self.take("[")
            names = [self.take(kind="upper").text]
            while self.at(","):
                self.i += 1
                names.append(self.take(kind="upper").text)
            self.take("]")
            self.take(":")
            body = self.unitary()
            return Forall(tuple(names), body) if q == "!" else Exists(tuple(names), body)
        return self.atom()

    def term(self) -> str:
        t = self.tok
        if t.kind not in ("lower", "upper"):
            self.fail("a term")
        self.i += 1
        if self.at("("):
            raise UnsupportedConstruct(f"{t.line}:{t.col}: function term {t.text}(...)")
        return t.text

    def atom(self) -> Formula:
        t = self.tok
        if t.kind == "dollar":
            raise UnsupportedConstruct(f"{t.line}:{t.col}: {t.text}")
        if t.kind == "upper":
            left = self.term()
            return self._equality(left, t)
        if t.kind != "lower":
            self.fail("an atom")
        self.i += 1
        if not self.at("("):
            return self._equality(t.text, t)
        self.i += 1
        args = [self.term()]
        while self.at(","):
            self.i += 1
            args.append(self.term())
        self.take(")")
        if t.text not in SIGNATURE or t.text in ("eq", "neq"):
            raise ParseError(t.line, t.col, "a known predicate", t.text)
        try:
            return Atom(t.text, tuple(args))
        except SortError as e:
            raise ParseError(t.line, t.col, str(e), t.text) from None

    def _equality(self, left: str, start: _Tok) -> Atom:
        if self.at("="):
            self.i += 1
            return Atom("eq", (left, self.term()))
        if self.at("!="):
            self.i += 1
            return Atom("neq", (left, self.term()))
        self.fail("'=' or '!='")


def parse(text: str) -> list[FofAnnotated]:
    return _Parser(text).units()


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.tok.kind != "eof":
        p.fail("end of formula")
    return f


# ---------------------------------------------------- rules <-> formulas

def _branch_formula(br: Branch) -> Formula:
    body = conj(br.atoms)
    return Exists(br.existentials, body) if br.existentials else body


def rule_formula(rule: CoherentRule) -> Formula:
    concl: Formula
    if len(rule.branches) == 1:
        concl = _branch_formula(rule.branches[0])
    else:
        concl = Or(tuple(_branch_formula(b) for b in rule.branches))
    body = Implies(conj(rule.premises), concl) if rule.premises else concl
    return Forall(rule.universals, body) if rule.universals else body


def rule_unit(rule: CoherentRule) -> FofAnnotated:
    return FofAnnotated(rule.name, "axiom", rule_formula(rule))


def _atoms_of(f: Formula, what: str) -> tuple[Atom, ...]:
    if isinstance(f, Atom):
        return (f,)
    if isinstance(f, And) and all(isinstance(a, Atom) for a in f.args):
        return tuple(f.args)
    raise UnsupportedConstruct(f"{what} must be a conjunction of atoms")


def _branch_of(f: Formula) -> Branch:
    if isinstance(f, Exists):
        return Branch(f.vars, _atoms_of(f.body, "existential body"))
    return Branch((), _atoms_of(f, "conclusion"))


def formula_rule(name: str, f: Formula) -> CoherentRule:
    """Read a coherent formula back into a rule; raises UnsupportedConstruct."""
    universals: tuple[str, ...] = ()
    if isinstance(f, Forall):
        universals, f = f.vars, f.body
    premises: tuple[Atom, ...] = ()
    if isinstance(f, Implies):
        premises, f = _atoms_of(f.left, "premise"), f.right
    if isinstance(f, Or):
        branches = tuple(_branch_of(b) for b in f.args)
    else:
        branches = (_branch_of(f),)
    for a in premises + tuple(x for b in branches for x in b.atoms):
        for t in a.args:
            if is_var(t) and t not in universals and not any(t in b.existentials for b in branches):
                raise UnsupportedConstruct(f"{name}: free variable {t}")
    try:
        return CoherentRule(name, universals, premises, branches)
    except ValueError as e:
        raise UnsupportedConstruct(str(e)) from None
