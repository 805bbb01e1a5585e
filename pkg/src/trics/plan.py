"""Ruler-and-compass construction plans and their text format."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .terms import Sort

# Significant points in canonical order, as labels and as KB constants.
POINT_LABELS = ("A", "B", "C", "Ma", "Mb", "Mc", "Ha", "Hb", "Hc", "O", "G", "H")
LABEL_TO_CONST = {
    "A": "pA", "B": "pB", "C": "pC",
    "Ma": "pMa", "Mb": "pMb", "Mc": "pMc",
    "Ha": "pHa", "Hb": "pHb", "Hc": "pHc",
    "O": "pOc", "G": "pG", "H": "pH",
}
CONST_TO_LABEL = {v: k for k, v in LABEL_TO_CONST.items()}
VERTICES = ("A", "B", "C")

# kind -> (input sorts, number of integer parameters, output sorts)
STEP_KINDS: dict[str, tuple[tuple[Sort, ...], int, tuple[Sort, ...]]] = {
    "LineThrough": ((Sort.POINT, Sort.POINT), 0, (Sort.LINE,)),
    "PerpThrough": ((Sort.LINE, Sort.POINT), 0, (Sort.LINE,)),
    "CircleCentered": ((Sort.POINT, Sort.POINT), 0, (Sort.CIRCLE,)),
    "IntersectLines": ((Sort.LINE, Sort.LINE), 0, (Sort.POINT,)),
    "IntersectLineCircle": ((Sort.LINE, Sort.CIRCLE), 0, (Sort.POINT, Sort.POINT)),
    "RatioPoint": ((Sort.POINT, Sort.POINT), 2, (Sort.POINT,)),
}


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class ConstructionStep:
    kind: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    params: tuple[int, ...] = ()
    # significant KB constant each output is meant to reconstruct (or None)
    intent: tuple[str | None, ...] = ()

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise PlanError(f"unknown step kind {self.kind!r}")
        ins, nparams, outs = STEP_KINDS[self.kind]
        if len(self.inputs) != len(ins):
            raise PlanError(f"{self.kind} takes {len(ins)} inputs")
        if len(self.outputs) != len(outs):
            raise PlanError(f"{self.kind} produces {len(outs)} outputs")
        if len(self.params) != nparams:
            raise PlanError(f"{self.kind} takes {nparams} integer parameters")
        if len(set(self.outputs)) != len(self.outputs):
            raise PlanError("output names must be distinct")
        if self.kind == "RatioPoint":
            n, d = self.params
            if n not in (1, 2, 3) or d not in (1, 2, 3):
                raise PlanError("ratio terms must be in {1, 2, 3}")
        if not self.intent:
            object.__setattr__(self, "intent", (None,) * len(self.outputs))
        elif len(self.intent) != len(self.outputs):
            raise PlanError("one intent per output")

    def output_sorts(self) -> tuple[Sort, ...]:
        return STEP_KINDS[self.kind][2]

    def input_sorts(self) -> tuple[Sort, ...]:
        return STEP_KINDS[self.kind][0]

    def format(self) -> str:
        args = ", ".join(list(self.inputs) + [str(p) for p in self.params])
        text = f"{', '.join(self.outputs)} = {self.kind}({args})"
        if any(self.intent):
            text += "  # " + " ".join(i or "-" for i in self.intent)
        return text


@dataclass
class ConstructionPlan:
    given: dict[str, str]                     # label -> KB constant, e.g. "Ha" -> "pHa"
    steps: list[ConstructionStep] = field(default_factory=list)
    outputs: dict[str, str] = field(default_factory=dict)  # vertex label -> plan name

    def sorts(self) -> dict[str, Sort]:
        out = {g: Sort.POINT for g in self.given}
        for st in self.steps:
            out.update(zip(st.outputs, st.output_sorts()))
        return out

    def validate(self) -> None:
        known = {g: Sort.POINT for g in self.given}
        for i, st in enumerate(self.steps, 1):
            for name, want in zip(st.inputs, st.input_sorts()):
                if name not in known:
                    raise PlanError(f"step {i}: {name} is not bound yet")
                if known[name] != want:
                    raise PlanError(f"step {i}: {name} is a {known[name].value}, expected {want.value}")
            for name, s in zip(st.outputs, st.output_sorts()):
                if name in known:
                    raise PlanError(f"step {i}: {name} is already bound")
                known[name] = s
        for v in VERTICES:
            name = self.outputs.get(v)
            if name is None or known.get(name) != Sort.POINT:
                raise PlanError(f"vertex {v} is not produced by the plan")

    def producer(self) -> dict[str, ConstructionStep]:
        return {o: st for st in self.steps for o in st.outputs}

    def intent_of(self, name: str) -> str | None:
        if name in self.given:
            return self.given[name]
        for st in self.steps:
            if name in st.outputs:
                return st.intent[st.outputs.index(name)]
        return None

    def format(self) -> str:
        lines = ["# given: " + " ".join(self.given),
                 "# outputs: " + " ".join(f"{v}={self.outputs[v]}" for v in VERTICES if v in self.outputs)]
        lines += [st.format() for st in self.steps]
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        return (isinstance(other, ConstructionPlan) and self.given == other.given
                and self.steps == other.steps and self.outputs == other.outputs)


_STEP_RE = re.compile(r"^\s*([A-Za-z_][\w]*(?:\s*,\s*[A-Za-z_][\w]*)*)\s*=\s*(\w+)\s*\(([^)]*)\)\s*$")


def parse_plan(text: str) -> ConstructionPlan:
    given: dict[str, str] = {}
    outputs: dict[str, str] = {}
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("given:"):
                for lab in body[6:].split():
                    if lab not in LABEL_TO_CONST:
                        raise PlanError(f"line {lineno}: unknown point {lab!r}")
                    given[lab] = LABEL_TO_CONST[lab]
            elif body.startswith("outputs:"):
                for pair in body[8:].split():
                    v, _, name = pair.partition("=")
                    if v not in VERTICES or not name:
                        raise PlanError(f"line {lineno}: bad output binding {pair!r}")
                    outputs[v] = name
            continue
        code, _, comment = line.partition("#")
        m = _STEP_RE.match(code)
        if not m:
            raise PlanError(f"line {lineno}: cannot parse step {code.strip()!r}")
        outs = tuple(o.strip() for o in m.group(1).split(","))
        kind = m.group(2)
        args = [a.strip() for a in m.group(3).split(",") if a.strip()]
        if kind not in STEP_KINDS:
            raise PlanError(f"line {lineno}: unknown step kind {kind!r}")
        nparams = STEP_KINDS[kind][1]
        try:
            params = tuple(int(a) for a in args[len(args) - nparams:]) if nparams else ()
        except ValueError:
            raise PlanError(f"line {lineno}: ratio terms must be integers") from None
        inputs = tuple(args[:len(args) - nparams])
        intent: tuple = ()
        if comment.strip():
            intent = tuple(None if t == "-" else t for t in comment.split())
        try:
            steps.append(ConstructionStep(kind, inputs, outs, params, intent))
        except PlanError as e:
            raise PlanError(f"line {lineno}: {e}") from None
    if not given:
        raise PlanError("missing '# given:' header")
    for v in VERTICES:
        if v in given:
            outputs.setdefault(v, v)
    plan = ConstructionPlan(given, steps, outputs)
    plan.validate()
    return plan
