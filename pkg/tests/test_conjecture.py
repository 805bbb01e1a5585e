from trics import tptp
from trics.conjecture import (conjecture_from_plan, export_problem, plan_naming, primed, select_axioms,
                              split_goals)
from trics.plan import parse_plan
from trics.terms import atom, eq, neq

EXPECTED_EX1 = """fof(th_A_Ha_O, conjecture, ( ( inc(pA,ha1) & inc(pHa1,ha1)
    & perp(ha1,a1) & inc(pHa1,a1) & inc_c(pA,cc1) & center(pOc1,cc1)
    & inc_c(pB,cc1) & inc(pB,a1) & inc_c(pC,cc1) & inc(pC,a1) )
    => ( pHa = pHa1 &  pOc = pOc1 ) ) )."""


def squash(text):
    return "".join(text.split())


def test_a_ha_o_conjecture_text(ex1_conjecture):
    assert squash(tptp.format_unit(ex1_conjecture.unit())) == squash(EXPECTED_EX1)


def test_a_ha_o_parses_back(ex1_conjecture):
    (u,) = tptp.parse(EXPECTED_EX1)
    assert u == ex1_conjecture.unit()


def test_a_o_g_conjecture(ex2_conjecture):
    hyps = set(ex2_conjecture.hypotheses)
    assert atom("ratio23", "pA", "pG1", "pA", "pMa1") in hyps
    assert atom("ratio23", "pH1", "pG1", "pH1", "pOc1") in hyps
    assert neq("pA", "pH1") in ex2_conjecture.nondegeneracy
    assert ex2_conjecture.goals == (eq("pOc", "pOc1"), eq("pG", "pG1"))


def test_primed_names():
    assert primed("bc") == "a1" and primed("ab") == "c1" and primed("pHa") == "pHa1"
    assert primed("cc") == "cc1"


def test_naming(ex1_plan):
    nm = plan_naming(ex1_plan)
    assert nm == {"A": "pA", "Ha": "pHa1", "O": "pOc1", "l1": "ha1", "l2": "a1", "c": "cc1",
                  "B": "pB", "C": "pC"}


def test_split_goals(kb, ex1_conjecture):
    tasks = split_goals(ex1_conjecture, kb)
    assert [t.name for t in tasks] == ["th_A_Ha_O0", "th_A_Ha_O1"]
    assert [t.goal for t in tasks] == list(ex1_conjecture.goals)
    for t in tasks:
        assert set(ex1_conjecture.premises()) == set(t.hypotheses)
        names = {r.name for r in t.axioms}
        assert {"bc_unique", "haA", "pHa_def", "cc_unique", "center_unique", "eq_sym"} <= names


def test_selection_keeps_equality_rules(kb, ex1_conjecture):
    (t, _) = split_goals(ex1_conjecture, kb, select=False)
    chosen = {r.name for r in select_axioms(t, kb)}
    assert "incEqSub1" in chosen and "eqnativeEqSub0" in chosen


def test_export_contains_one_conjecture(kb, ex1_plan):
    units = tptp.parse(export_problem(ex1_plan, kb))
    assert [u.role for u in units].count("conjecture") == 1
    assert any(u.role == "hypothesis" for u in units)
    assert sum(u.role == "axiom" for u in units) > 100


def test_export_every_solved_problem(kb):
    from trics.kb import enumerate_corpus
    from trics.solver import solve

    for p in enumerate_corpus():
        plan = solve(p, kb)
        if plan:
            units = tptp.parse(export_problem(plan, kb))
            assert [u.role for u in units].count("conjecture") == 1


def test_ratio_hypothesis_forms(kb):
    plan = parse_plan("""# given: A G O
# outputs: A=A B=P1 C=P3
P1 = RatioPoint(A, G, 2, 3)  # pMa
P2 = RatioPoint(O, G, 1, 3)  # pH
P3 = RatioPoint(G, O, 3, 1)  # pMb
""")
    c = conjecture_from_plan(plan, kb)
    assert c.hypotheses[:2] == (atom("ratio23", "pA", "pG1", "pA", "pMa1"),
                                atom("ratio23", "pH1", "pG1", "pH1", "pOc1"))
    assert c.hypotheses[2] == atom("ratio13", "pG1", "pMb1", "pG1", "pOc1")
