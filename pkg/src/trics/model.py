"""Finite numeric models: truth tables over a diagram's objects and rule checking."""
from __future__ import annotations

import itertools
from collections import defaultdict

import numpy as np

from .oracle import (Diagram, RATIOS, _Degenerate, circle_through, eval_atom, line_through, same_object)
from .terms import Atom, CoherentRule, Sort, is_var


def _add_unique(table: dict, name: str, value, tol: float) -> bool:
    if any(same_object(value, v, tol) for v in table.values()):
        return False
    table[name] = value
    return True


def with_auxiliaries(d: Diagram, tol: float = 1e-6) -> Diagram:
    """Extend a triangle diagram with extra objects so that rules quantify over more than the
    named significant ones: lines through every pair of named points, antipodes and
    nine-point-circle points, and two more circles."""
    out = d.copy()
    pts = dict(d.points)
    O, H = pts.get("pOc"), pts.get("pH")
    extra = {}
    if O is not None and H is not None:
        for v in ("pA", "pB", "pC"):
            if v in pts:
                extra[f"_anti_{v}"] = 2 * O - pts[v]
                extra[f"_euler_{v}"] = (pts[v] + H) / 2
    extra["_far"] = np.array([7.31, -3.17])
    extra["_near"] = np.array([-1.13, 2.71])
    for name, p in extra.items():
        _add_unique(out.points, name, p, tol)
    k = 0
    for (n1, p1), (n2, p2) in itertools.combinations(list(d.points.items()), 2):
        try:
            ln = line_through(p1, p2, tol)
        except _Degenerate:
            continue
        if _add_unique(out.lines, f"_l{k}", ln, tol):
            k += 1
    if O is not None and H is not None:
        nine = (O + H) / 2
        try:
            _add_unique(out.circles, "_nine", circle_through(nine, (pts["pB"] + pts["pC"]) / 2, tol), tol)
            _add_unique(out.circles, "_cA", circle_through(pts["pA"], pts["pB"], tol), tol)
        except (_Degenerate, KeyError):
            pass
    return out


class Model:
    """Ground relations of a diagram, evaluated once with numpy."""

    def __init__(self, d: Diagram, tol: float = 1e-7, auxiliary: bool = False):
        self.diagram = with_auxiliaries(d) if auxiliary else d
        self.tol = tol
        dg = self.diagram
        self.domain = {
            Sort.POINT: list(dg.points),
            Sort.LINE: list(dg.lines),
            Sort.CIRCLE: list(dg.circles),
        }
        self.rel: dict[str, set[tuple[str, ...]]] = {}
        self._build()
        self.index: dict[tuple[str, int, str], list[tuple[str, ...]]] = defaultdict(list)
        for pred, tuples in self.rel.items():
            for t in tuples:
                for i, x in enumerate(t):
                    self.index[(pred, i, x)].append(t)
        self.sort_of = {n: s for s, names in self.domain.items() for n in names}

    def _build(self) -> None:
        dg, tol = self.diagram, self.tol
        pn, ln, cn = self.domain[Sort.POINT], self.domain[Sort.LINE], self.domain[Sort.CIRCLE]
        P = np.array([dg.points[n] for n in pn]).reshape(-1, 2)
        L = np.array([dg.lines[n] for n in ln]).reshape(-1, 3)
        inc = np.abs(P @ L[:, :2].T + L[:, 2]) <= tol
        self.rel["inc"] = {(pn[i], ln[j]) for i, j in zip(*np.nonzero(inc))}
        inc_c, center = set(), set()
        for c in cn:
            cen, r = dg.circles[c]
            dist = np.hypot(*(P - cen).T)
            inc_c |= {(pn[i], c) for i in np.nonzero(np.abs(dist - r) <= tol)[0]}
            center |= {(pn[i], c) for i in np.nonzero(np.max(np.abs(P - cen), axis=1) <= tol)[0]}
        self.rel["inc_c"], self.rel["center"] = inc_c, center
        ab = L[:, :2]
        dot = np.abs(ab @ ab.T)
        cross = np.abs(np.outer(ab[:, 0], ab[:, 1]) - np.outer(ab[:, 1], ab[:, 0]))
        self.rel["perp"] = {(ln[i], ln[j]) for i, j in zip(*np.nonzero(dot <= tol))}
        self.rel["para"] = {(ln[i], ln[j]) for i, j in zip(*np.nonzero(cross <= tol))}
        line = set()
        for j, l in enumerate(ln):
            on = [pn[i] for i in np.nonzero(inc[:, j])[0]]
            line |= {(a, b, l) for a, b in itertools.permutations(on, 2)
                     if np.max(np.abs(dg.points[a] - dg.points[b])) > tol}
        self.rel["line"] = line
        V = P[None, :, :] - P[:, None, :]                     # V[i, j] = P[j] - P[i]
        nonzero = np.hypot(V[..., 0], V[..., 1]) > tol
        for pred, k in RATIOS.items():
            diff = np.max(np.abs(V[:, :, None, None, :] - k * V[None, None, :, :, :]), axis=-1)
            ok = (diff <= tol) & nonzero[None, None, :, :]
            self.rel[pred] = {(pn[a], pn[b], pn[c], pn[d]) for a, b, c, d in zip(*np.nonzero(ok))}
        for pred in ("eq", "neq"):
            self.rel[pred] = set()
        for s, names in self.domain.items():
            table = {Sort.POINT: dg.points, Sort.LINE: dg.lines, Sort.CIRCLE: dg.circles}[s]
            for a, b in itertools.product(names, repeat=2):
                same = a == b or same_object(table[a], table[b], tol)
                self.rel["eq" if same else "neq"].add((a, b))

    def holds(self, a: Atom) -> bool:
        return tuple(a.args) in self.rel[a.pred]

    def _holds_under(self, a: Atom, binding: dict[str, str]) -> bool:
        return tuple(binding.get(x, x) for x in a.args) in self.rel[a.pred]

    def matches(self, premises, binding: dict[str, str], var_sorts=None):
        """All extensions of ``binding`` satisfying every premise (and ``var_sorts``)."""
        pats = [(p.pred, tuple((x, is_var(x)) for x in p.args)) for p in premises]
        yield from self._join(pats, dict(binding), var_sorts or {})

    def _join(self, pats, binding, var_sorts):
        if not pats:
            yield dict(binding)
            return
        best, best_cost, best_key = 0, None, None
        for k, (pred, args) in enumerate(pats):
            key = None
            nbound = 0
            for i, (x, v) in enumerate(args):
                if not v or x in binding:
                    nbound += 1
                    if key is None:
                        key = (pred, i, binding[x] if v else x)
            if nbound == len(args):
                cost = -1
            elif key is not None:
                cost = len(self.index.get(key, ()))
            else:
                cost = len(self.rel[pred]) + 1_000_000
            if best_cost is None or cost < best_cost:
                best, best_cost, best_key = k, cost, key
        pred, args = pats[best]
        rest = pats[:best] + pats[best + 1:]
        if best_cost == -1:
            if tuple(binding[x] if v else x for x, v in args) in self.rel[pred]:
                yield from self._join(rest, binding, var_sorts)
            return
        candidates = self.index.get(best_key, ()) if best_key is not None else self.rel[pred]
        sort_of = self.sort_of
        for t in candidates:
            added = []
            ok = True
            for (x, v), val in zip(args, t):
                if v:
                    cur = binding.get(x)
                    if cur is None:
                        want = var_sorts.get(x)
                        if want is not None and sort_of[val] != want:
                            ok = False
                            break
                        binding[x] = val
                        added.append(x)
                    elif cur != val:
                        ok = False
                        break
                elif x != val:
                    ok = False
                    break
            if ok:
                yield from self._join(rest, binding, var_sorts)
            for x in added:
                del binding[x]

    def _branch_holds(self, branch, binding: dict[str, str], rule: CoherentRule) -> bool:
        if not branch.existentials:
            return all(self._holds_under(a, binding) for a in branch.atoms)
        # existential witnesses: any object of the right sort, plus lines through bound points
        pools = [self.domain.get(rule.var_sorts.get(v), []) for v in branch.existentials]
        for combo in itertools.product(*pools):
            b = dict(binding)
            b.update(zip(branch.existentials, combo))
            if all(self._holds_under(a, b) for a in branch.atoms):
                return True
        return self._constructed_witness(branch, binding, rule)

    def _constructed_witness(self, branch, binding, rule) -> bool:
        if len(branch.existentials) != 1 or rule.var_sorts.get(branch.existentials[0]) != Sort.LINE:
            return False
        v = branch.existentials[0]
        d = self.diagram.copy()
        bound_pts = sorted({binding[x] for x in binding if binding[x] in d.points})
        for p, q in itertools.permutations(bound_pts, 2):
            try:
                d.lines["_w"] = line_through(d.points[p], d.points[q], self.tol)
            except _Degenerate:
                continue
            b = dict(binding)
            b[v] = "_w"
            if all(eval_atom(a.substitute(b), d, self.tol) for a in branch.atoms):
                return True
        return False

    def check_rule(self, rule: CoherentRule) -> tuple[int, dict | None]:
        """Number of premise matches and the first binding whose conclusion fails."""
        n = 0
        free = [v for v in rule.universals if not any(v in p.args for p in rule.premises)]
        for b in self.matches(list(rule.premises), {}, rule.var_sorts):
            pools = [self.domain.get(rule.var_sorts.get(v), []) for v in free]
            for combo in itertools.product(*pools):
                full = dict(b)
                full.update(zip(free, combo))
                n += 1
                if not any(self._branch_holds(br, full, rule) for br in rule.branches):
                    return n, {v: full[v] for v in rule.universals if v in full}
        return n, None
