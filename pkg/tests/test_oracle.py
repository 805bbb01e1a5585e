import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trics.conjecture import conjecture_from_plan
from trics.kb import standard_kb
from trics.oracle import (ExecutionFailure, UnboundConstant, eval_atom, execute_plan, normalize_line,
                          sample_triangle, same_object, triangle_diagram, verify_plan)
from trics.plan import ConstructionStep, parse_plan
from trics.terms import atom

FIXED = triangle_diagram(np.array([0.0, 0.0]), np.array([4.0, 0.0]), np.array([1.0, 3.0]))


def close(p, q):
    return np.allclose(p, q, atol=1e-12)


def test_fixed_triangle_points():
    p = FIXED.points
    assert close(p["pOc"], [2, 1])
    assert close(p["pG"], [5 / 3, 1])
    assert close(p["pH"], [1, 1])
    assert close(p["pMa"], [2.5, 1.5])
    assert close(p["pHa"], [2, 2])


def test_fixed_triangle_atoms():
    assert eval_atom(atom("ratio23", "pA", "pG", "pA", "pMa"), FIXED)
    assert not eval_atom(atom("inc", "pA", "bc"), FIXED)
    # distance from A to bc is 2*sqrt(2)
    a, b, c = FIXED.lines["bc"]
    assert math.isclose(abs(c), 2 * math.sqrt(2))


def test_ratio_is_directed():
    assert eval_atom(atom("ratio13", "pOc", "pG", "pOc", "pH"), FIXED)
    assert not eval_atom(atom("ratio13", "pG", "pOc", "pOc", "pH"), FIXED)


def test_unbound_constant():
    with pytest.raises(UnboundConstant):
        eval_atom(atom("inc", "pA", "nowhere"), FIXED)


def test_equilateral_centers_coincide():
    d = triangle_diagram(np.array([0.0, 0.0]), np.array([2.0, 0.0]), np.array([1.0, math.sqrt(3)]))
    assert close(d.points["pOc"], d.points["pG"]) and close(d.points["pG"], d.points["pH"])


def test_line_normalization_canonical():
    l1 = normalize_line(2.0, -2.0, 4.0)
    l2 = normalize_line(-1.0, 1.0, -2.0)
    assert close(l1, l2)
    assert math.isclose(l1[0] ** 2 + l1[1] ** 2, 1.0)
    assert l1[0] > 0
    assert same_object(l1, l2, 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_sample_is_deterministic_and_consistent(seed):
    d1, d2 = sample_triangle(seed), sample_triangle(seed)
    for k in d1.points:
        assert np.array_equal(d1.points[k], d2.points[k])
    assert eval_atom(atom("ratio13", "pOc", "pG", "pOc", "pH"), d1)
    assert eval_atom(atom("perp", "ha", "bc"), d1)


def test_kb_facts_hold_on_samples():
    kb = standard_kb()
    for seed in range(100):
        d = sample_triangle(seed)
        bad = [str(a) for a in kb.facts if not eval_atom(a, d)]
        assert not bad, (seed, bad)


EX1 = """\
l1 = LineThrough(A, Ha)
l2 = PerpThrough(l1, Ha)
c = CircleCentered(O, A)
B, C = IntersectLineCircle(l2, c)
"""


def test_execute_a_ha_o_on_fixed_triangle():
    plan = parse_plan("# given: A Ha O\n# outputs: A=A B=B C=C\n" + EX1)
    env = execute_plan(plan, {"A": (0, 0), "Ha": (2, 2), "O": (2, 1)})
    s = 1 / math.sqrt(2)
    assert same_object(env["l1"], normalize_line(s, -s, 0.0), 1e-12)
    assert same_object(env["l2"], normalize_line(s, s, -4 * s), 1e-12)
    cen, r = env["c"]
    assert close(cen, [2, 1]) and math.isclose(r, math.sqrt(5))
    got = sorted(tuple(np.round(env[v], 12)) for v in ("B", "C"))
    assert got == [(1.0, 3.0), (4.0, 0.0)]


def test_ratio_point_on_fixed_triangle():
    plan = parse_plan("# given: A G Ha\n# outputs: A=A B=P1 C=P1\nP1 = RatioPoint(A, G, 2, 3)\n")
    env = execute_plan(plan, {"A": (0, 0), "G": (5 / 3, 1), "Ha": (2, 2)})
    assert close(env["P1"], [2.5, 1.5])


def test_coincident_circle():
    plan = parse_plan("# given: A O Ha\n# outputs: A=A B=A C=A\nc = CircleCentered(O, O)\n")
    with pytest.raises(ExecutionFailure) as e:
        execute_plan(plan, {"A": (0, 0), "O": (1, 1), "Ha": (2, 2)})
    assert e.value.kind == "CoincidentInputs"


def test_no_intersection():
    plan = parse_plan("# given: A O Ha\n# outputs: A=A B=B C=C\n"
                      "l0 = LineThrough(A, Ha)\nl1 = PerpThrough(l0, O)\nc = CircleCentered(A, Ha)\n"
                      "B, C = IntersectLineCircle(l1, c)\n")
    # unit circle at the origin against the line x = 10
    with pytest.raises(ExecutionFailure) as e:
        execute_plan(plan, {"A": (0, 0), "O": (10, 5), "Ha": (1, 0)})
    assert e.value.kind == "NoIntersection"
    assert e.value.step == 4


def test_tangent():
    plan = parse_plan("# given: A O Ha\n# outputs: A=A B=B C=C\n"
                      "l1 = LineThrough(A, Ha)\nc = CircleCentered(O, Ha)\n"
                      "B, C = IntersectLineCircle(l1, c)\n")
    # circle centered at (3, 1) through (2, 2) touches y = x exactly at (2, 2)
    with pytest.raises(ExecutionFailure) as e:
        execute_plan(plan, {"A": (0, 0), "O": (3, 1), "Ha": (2, 2)})
    assert e.value.kind == "Tangent"


def test_verify_golden_plans(ex1_plan, ex2_plan):
    assert verify_plan(ex1_plan, 100, 1e-9, seed=0).passes == 100
    assert verify_plan(ex2_plan, 100, 1e-9, seed=0).passes == 100


def test_verify_detects_wrong_construction(ex1_plan):
    bad = parse_plan(ex1_plan.format().replace("PerpThrough(l1, Ha)", "LineThrough(A, Ha)"))
    report = verify_plan(bad, 20, seed=0)
    assert report.passes < 20 and report.failures
    assert all(f.seed == f.trial for f in report.failures)


def test_verify_deterministic(ex2_plan):
    assert verify_plan(ex2_plan, 10, seed=5) == verify_plan(ex2_plan, 10, seed=5)


def test_hypothesis_residuals_small(kb, ex1_plan, ex2_plan):
    # every conjecture hypothesis holds on the executed objects at construction tolerance
    for plan in (ex1_plan, ex2_plan):
        c = conjecture_from_plan(plan, kb)
        for seed in range(20):
            d = sample_triangle(seed)
            env = execute_plan(plan, {g: d.points[k] for g, k in plan.given.items()})
            nd = d.copy()
            for name, const in c.naming.items():
                if const not in nd.names():
                    nd.add(const, env[name])
            assert all(eval_atom(a, nd, 1e-9) for a in c.hypotheses + c.nondegeneracy)


def test_plan_step_validation():
    with pytest.raises(ValueError):
        ConstructionStep("RatioPoint", ("A", "G"), ("P1",), (0, 3))
    with pytest.raises(ValueError):
        ConstructionStep("IntersectLineCircle", ("l1", "c"), ("B",))
