"""Numeric analytic-geometry model of triangles, plans and atoms."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .plan import LABEL_TO_CONST, VERTICES, ConstructionPlan
from .terms import Atom

PLAN_TOL = 1e-9
RULE_TOL = 1e-7

Point = np.ndarray                  # shape (2,)
Line = np.ndarray                   # shape (3,), a*x + b*y + c = 0 with a^2 + b^2 = 1
Circle = tuple                      # (center: Point, radius: float)


class SamplingFailed(RuntimeError):
    pass


class UnboundConstant(KeyError):
    pass


class ExecutionFailure(Exception):
    def __init__(self, step: int, kind: str, detail: str = ""):
        self.step, self.kind = step, kind
        super().__init__(f"step {step}: {kind}" + (f" ({detail})" if detail else ""))


class _Degenerate(Exception):
    def __init__(self, kind: str):
        self.kind = kind


@dataclass
class Diagram:
    points: dict[str, Point] = field(default_factory=dict)
    lines: dict[str, Line] = field(default_factory=dict)
    circles: dict[str, Circle] = field(default_factory=dict)

    def copy(self) -> "Diagram":
        return Diagram(dict(self.points), dict(self.lines), dict(self.circles))

    def names(self) -> set[str]:
        return set(self.points) | set(self.lines) | set(self.circles)

    def add(self, name: str, value) -> None:
        if isinstance(value, tuple):
            self.circles[name] = value
        elif len(value) == 3:
            self.lines[name] = value
        else:
            self.points[name] = value


# ------------------------------------------------------------ primitives

def normalize_line(a: float, b: float, c: float) -> Line:
    n = math.hypot(a, b)
    if n == 0:
        raise _Degenerate("CoincidentInputs")
    v = np.array([a, b, c], dtype=float) / n
    lead = v[0] if abs(v[0]) > 1e-12 else v[1]
    return -v if lead < 0 else v


def line_through(p: Point, q: Point, tol: float = PLAN_TOL) -> Line:
    d = q - p
    if math.hypot(*d) <= tol:
        raise _Degenerate("CoincidentInputs")
    return normalize_line(-d[1], d[0], d[1] * p[0] - d[0] * p[1])


def perp_through(line: Line, p: Point) -> Line:
    a, b, _ = line
    return normalize_line(b, -a, -(b * p[0] - a * p[1]))


def para_through(line: Line, p: Point) -> Line:
    a, b, _ = line
    return normalize_line(a, b, -(a * p[0] + b * p[1]))


def circle_through(center: Point, p: Point, tol: float = PLAN_TOL) -> Circle:
    r = float(math.hypot(*(p - center)))
    if r <= tol:
        raise _Degenerate("CoincidentInputs")
    return (np.array(center, dtype=float), r)


def intersect_lines(l1: Line, l2: Line, tol: float = PLAN_TOL) -> Point:
    det = l1[0] * l2[1] - l1[1] * l2[0]
    if abs(det) <= tol:
        raise _Degenerate("NoIntersection")
    x = (l1[1] * l2[2] - l2[1] * l1[2]) / det
    y = (l2[0] * l1[2] - l1[0] * l2[2]) / det
    return np.array([x, y])


def intersect_line_circle(line: Line, circle: Circle, tol: float = PLAN_TOL) -> tuple[Point, Point]:
    a, b, c = line
    center, r = circle
    dist = a * center[0] + b * center[1] + c
    foot = center - dist * np.array([a, b])
    disc = r * r - dist * dist
    if disc < -tol:
        raise _Degenerate("NoIntersection")
    if disc <= tol:
        raise _Degenerate("Tangent")
    h = math.sqrt(disc)
    direction = np.array([-b, a])
    return foot - h * direction, foot + h * direction


def ratio_point(a: Point, b: Point, n: int, d: int) -> Point:
    """The point P with vec(a,b) : vec(a,P) = n : d."""
    return a + (d / n) * (b - a)


def foot(p: Point, line: Line) -> Point:
    a, b, c = line
    return p - (a * p[0] + b * p[1] + c) * np.array([a, b])


def significant_points(A: Point, B: Point, C: Point) -> dict[str, Point]:
    """Closed-form significant points keyed by label."""
    A, B, C = (np.asarray(v, dtype=float) for v in (A, B, C))
    ax, ay = A
    bx, by = B
    cx, cy = C
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    a2, b2, c2 = A @ A, B @ B, C @ C
    O = np.array([(a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d,
                  (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d])
    G = (A + B + C) / 3
    H = A + B + C - 2 * O

    def alt_foot(p, q, r):
        t = (p - q) @ (r - q) / ((r - q) @ (r - q))
        return q + t * (r - q)

    return {
        "A": A, "B": B, "C": C,
        "Ma": (B + C) / 2, "Mb": (C + A) / 2, "Mc": (A + B) / 2,
        "Ha": alt_foot(A, B, C), "Hb": alt_foot(B, C, A), "Hc": alt_foot(C, A, B),
        "O": O, "G": G, "H": H,
    }


def triangle_diagram(A, B, C) -> Diagram:
    pts = significant_points(A, B, C)
    d = Diagram()
    for lab, p in pts.items():
        d.points[LABEL_TO_CONST[lab]] = p
    for i, (v, side, alt, bis, med) in enumerate(zip(
            "ABC", ("bc", "ca", "ab"), ("ha", "hb", "hc"), ("bisa", "bisb", "bisc"),
            ("ma_med", "mb_med", "mc_med"))):
        p, q, r = pts[v], pts["ABC"[(i + 1) % 3]], pts["ABC"[(i + 2) % 3]]
        m = pts["M" + v.lower()]
        d.lines[side] = line_through(q, r)
        d.lines[alt] = perp_through(d.lines[side], p)
        d.lines[bis] = perp_through(d.lines[side], m)
        d.lines[med] = line_through(p, m)
    d.circles["cc"] = circle_through(pts["O"], pts["A"])
    return d


def _acceptable(A, B, C) -> bool:
    sides = [np.linalg.norm(B - C), np.linalg.norm(C - A), np.linalg.norm(A - B)]
    if min(sides) < 1:
        return False
    a, b, c = sides
    angles = []
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        cos = (y * y + z * z - x * x) / (2 * y * z)
        angles.append(math.degrees(math.acos(max(-1.0, min(1.0, cos)))))
    return min(angles) >= 10


def sample_triangle(seed: int, max_tries: int = 10_000) -> Diagram:
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        A, B, C = rng.uniform(-10, 10, size=(3, 2))
        if _acceptable(A, B, C):
            return triangle_diagram(A, B, C)
    raise SamplingFailed(f"no acceptable triangle in {max_tries} tries (seed {seed})")


# ------------------------------------------------------------ evaluation

def lookup(d: Diagram, name: str):
    for table in (d.points, d.lines, d.circles):
        if name in table:
            return table[name]
    raise UnboundConstant(name)


def same_object(x, y, tol: float) -> bool:
    if isinstance(x, tuple) or isinstance(y, tuple):
        if not (isinstance(x, tuple) and isinstance(y, tuple)):
            return False
        return bool(np.max(np.abs(x[0] - y[0])) <= tol and abs(x[1] - y[1]) <= tol)
    if len(x) != len(y):
        return False
    if len(x) == 3:
        return bool(min(np.max(np.abs(x - y)), np.max(np.abs(x + y))) <= tol)
    return bool(np.max(np.abs(x - y)) <= tol)


RATIOS = {"ratio12": 1 / 2, "ratio13": 1 / 3, "ratio21": 2.0, "ratio23": 2 / 3}


def eval_atom(a: Atom, d: Diagram, tol: float = RULE_TOL) -> bool:
    v = [lookup(d, x) for x in a.args]
    p = a.pred
    if p == "inc":
        pt, ln = v
        return bool(abs(ln[0] * pt[0] + ln[1] * pt[1] + ln[2]) <= tol)
    if p == "inc_c":
        pt, (center, r) = v
        return bool(abs(math.hypot(*(pt - center)) - r) <= tol)
    if p == "center":
        pt, (center, _) = v
        return bool(np.max(np.abs(pt - center)) <= tol)
    if p == "perp":
        l1, l2 = v
        return bool(abs(l1[0] * l2[0] + l1[1] * l2[1]) <= tol)
    if p == "para":
        l1, l2 = v
        return bool(abs(l1[0] * l2[1] - l2[0] * l1[1]) <= tol)
    if p == "line":
        p1, p2, ln = v
        if np.max(np.abs(p1 - p2)) <= tol:
            return False
        return all(abs(ln[0] * q[0] + ln[1] * q[1] + ln[2]) <= tol for q in (p1, p2))
    if p in RATIOS:
        a_, b_, c_, d_ = v
        cd = d_ - c_
        if math.hypot(*cd) <= tol:
            return False
        return bool(np.max(np.abs((b_ - a_) - RATIOS[p] * cd)) <= tol)
    if p == "eq":
        return same_object(v[0], v[1], tol)
    if p == "neq":
        return not same_object(v[0], v[1], tol)
    raise ValueError(f"unknown predicate {p}")


# ------------------------------------------------------------ plans

def execute_plan(plan: ConstructionPlan, given: dict, tol: float = PLAN_TOL) -> dict:
    """Evaluate every step; returns plan name -> numeric object."""
    env = {}
    for lab in plan.given:
        if lab not in given:
            raise KeyError(f"no coordinates for given point {lab}")
        env[lab] = np.asarray(given[lab], dtype=float)
    for i, st in enumerate(plan.steps, 1):
        args = [env[x] for x in st.inputs]
        try:
            if st.kind == "LineThrough":
                outs = (line_through(*args, tol=tol),)
            elif st.kind == "PerpThrough":
                outs = (perp_through(*args),)
            elif st.kind == "CircleCentered":
                outs = (circle_through(*args, tol=tol),)
            elif st.kind == "IntersectLines":
                outs = (intersect_lines(*args, tol=tol),)
            elif st.kind == "IntersectLineCircle":
                outs = intersect_line_circle(*args, tol=tol)
            elif st.kind == "RatioPoint":
                if np.max(np.abs(args[0] - args[1])) <= tol:
                    raise _Degenerate("CoincidentInputs")
                outs = (ratio_point(args[0], args[1], *st.params),)
            else:  # pragma: no cover - guarded by ConstructionStep
                raise ValueError(st.kind)
        except _Degenerate as e:
            raise ExecutionFailure(i, e.kind, st.format()) from None
        env.update(zip(st.outputs, outs))
    return env


@dataclass
class TrialFailure:
    trial: int
    seed: int
    reason: str


@dataclass
class VerificationReport:
    trials: int
    passes: int
    failures: list[TrialFailure]

    @property
    def ok(self) -> bool:
        return self.passes == self.trials

    def format(self) -> str:
        rows = [f"trials  {self.trials}", f"passed  {self.passes}", f"failed  {len(self.failures)}"]
        for f in self.failures:
            rows.append(f"  trial {f.trial:>4}  seed {f.seed:>8}  {f.reason}")
        return "\n".join(rows) + "\n"


def given_coordinates(plan: ConstructionPlan, d: Diagram) -> dict[str, Point]:
    return {lab: d.points[const] for lab, const in plan.given.items()}


def matches_vertices(outputs: list[Point], d: Diagram, tol: float) -> bool:
    target = [d.points[LABEL_TO_CONST[v]] for v in VERTICES]
    return any(all(np.max(np.abs(o - t)) <= tol for o, t in zip(outputs, perm))
               for perm in itertools.permutations(target))


def verify_plan(plan: ConstructionPlan, trials: int = 100, tol: float = PLAN_TOL,
                seed: int = 0) -> VerificationReport:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    failures = []
    for i in range(trials):
        s = seed + i
        d = sample_triangle(s)
        try:
            env = execute_plan(plan, given_coordinates(plan, d), tol)
        except ExecutionFailure as e:
            failures.append(TrialFailure(i, s, str(e)))
            continue
        outs = [env[plan.outputs[v]] for v in VERTICES]
        if not matches_vertices(outs, d, tol):
            failures.append(TrialFailure(i, s, "outputs do not reproduce A, B, C"))
    return VerificationReport(trials, trials - len(failures), failures)
