import pytest

from trics.terms import (Atom, Sort, SortError, atom, eq, infer_sorts, is_var, make_rule, neq,
                         parse_atom, well_sorted)


def test_atom_arity_checked():
    with pytest.raises(SortError):
        Atom("inc", ("pA",))
    with pytest.raises(SortError):
        Atom("collinear", ("pA", "pB", "pC"))


def test_atom_text_round_trip():
    for a in (atom("inc", "pA", "ha1"), eq("pHa", "pHa1"), neq("pA", "pH1"),
              atom("ratio23", "pA", "pG1", "pA", "pMa1")):
        assert parse_atom(str(a)) == a
    assert str(atom("inc", "pB", "a1")) == "inc(pB, a1)"
    assert str(eq("a1", "bc")) == "a1 = bc"


def test_parse_atom_rejects_garbage():
    with pytest.raises(ValueError):
        parse_atom("inc pA")


def test_variables_are_uppercase():
    assert is_var("X") and is_var("P1")
    assert not is_var("pA") and not is_var("bc")


def test_rule_sorts_inferred():
    r = make_rule("haA", ["H"], [atom("perp", "H", "bc"), atom("inc", "pA", "H")], [eq("ha", "H")])
    assert r.var_sorts["H"] == Sort.LINE
    assert not r.is_existential and not r.is_disjunctive


def test_existential_rule():
    r = make_rule("ex_line", ["P1", "P2"], [neq("P1", "P2")], [atom("line", "P1", "P2", "L")], ["L"])
    assert r.is_existential
    assert r.var_sorts["L"] == Sort.LINE and r.var_sorts["P1"] == Sort.POINT


def test_sort_clash_detected():
    with pytest.raises(SortError):
        infer_sorts([atom("inc", "x", "y"), atom("inc", "y", "z")])


def test_polymorphic_equality_sorts():
    sorts = infer_sorts([atom("inc", "p", "l"), eq("l", "m"), eq("p", "q")])
    assert sorts["m"] == Sort.LINE and sorts["q"] == Sort.POINT
    assert well_sorted(eq("l", "m"), sorts)
    assert not well_sorted(eq("p", "l"), sorts)
