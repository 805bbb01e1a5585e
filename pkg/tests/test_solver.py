import pytest

from trics.kb import ProblemSpec, enumerate_corpus
from trics.oracle import verify_plan
from trics.plan import ConstructionPlan, ConstructionStep, PlanError, parse_plan
from trics.solver import SearchLimits, Unsolved, explain_plan, solve

EX1_TEXT = """\
1. Construct the line l1 = AHa.
2. Construct the line l2 such that it is perpendicular to the line l1 and that it contains Ha.
3. Construct the circle c centered at O containing A.
4. Let B and C be the intersections of the line l2 and the circle c."""


def test_a_ha_o_plan(ex1_plan):
    assert [s.format() for s in ex1_plan.steps] == [
        "l1 = LineThrough(A, Ha)  # ha",
        "l2 = PerpThrough(l1, Ha)  # bc",
        "c = CircleCentered(O, A)  # cc",
        "B, C = IntersectLineCircle(l2, c)  # pB pC",
    ]
    assert explain_plan(ex1_plan) == EX1_TEXT


def test_a_o_g_plan(ex2_plan):
    steps = [(s.kind, s.inputs, s.outputs, s.params) for s in ex2_plan.steps]
    assert steps == [
        ("RatioPoint", ("A", "G"), ("P1",), (2, 3)),
        ("RatioPoint", ("O", "G"), ("P2",), (1, 3)),
        ("LineThrough", ("A", "P2"), ("l1",), ()),
        ("PerpThrough", ("l1", "P1"), ("l2",), ()),
        ("CircleCentered", ("O", "A"), ("c",), ()),
        ("IntersectLineCircle", ("l2", "c"), ("B", "C"), ()),
    ]
    text = explain_plan(ex2_plan).splitlines()
    assert text[0] == "1. Construct the point P1 such that AG : AP1 = 2:3."
    assert text[1] == "2. Construct the point P2 such that OG : OP2 = 1:3."


def test_plan_text_round_trip(ex1_plan, ex2_plan):
    for plan in (ex1_plan, ex2_plan):
        again = parse_plan(plan.format())
        assert again == plan
        assert again.format() == plan.format()


def test_parse_plan_errors():
    with pytest.raises(PlanError):
        parse_plan("# given: A Ha O\n# outputs: A=A B=B C=C\nl1 = Teleport(A)\n")
    with pytest.raises(PlanError):
        parse_plan("# given: A Ha O\n# outputs: A=A B=B C=C\nl2 = PerpThrough(l1, Ha)\n")


def test_plan_validation_catches_sort_errors():
    plan = ConstructionPlan({"A": "pA", "Ha": "pHa", "O": "pOc"},
                            [ConstructionStep("PerpThrough", ("A", "Ha"), ("l1",))],
                            {"A": "A", "B": "A", "C": "A"})
    with pytest.raises(PlanError):
        plan.validate()


def test_solver_deterministic(kb):
    for p in enumerate_corpus()[:10]:
        a, b = solve(p, kb), solve(p, kb)
        assert a == b


def test_unsolved_reason(kb):
    r = solve(ProblemSpec(("Ha", "Hb", "Hc")), kb)
    assert isinstance(r, Unsolved) and not r
    assert r.reason == "NoDetermination"


def test_budget_exhausted(kb):
    r = solve(ProblemSpec(("A", "O", "G")), kb, SearchLimits(max_steps=3))
    assert isinstance(r, Unsolved) and r.reason == "BudgetExhausted"
    r = solve(ProblemSpec(("A", "O", "G")), kb, SearchLimits(max_rounds=1))
    assert r.reason == "BudgetExhausted"


def test_symmetric_problem_solved(kb):
    plan = solve(ProblemSpec(("B", "Hb", "O")), kb)
    assert plan and verify_plan(plan, 10).ok


def test_every_solved_plan_verifies(kb):
    solved = 0
    for p in enumerate_corpus():
        plan = solve(p, kb)
        if plan:
            solved += 1
            assert verify_plan(plan, 10, seed=11).ok, p.name
            assert len(plan.steps) <= SearchLimits().max_steps
    assert solved >= 20
