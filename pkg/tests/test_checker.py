from dataclasses import replace

from conftest import mutations
from trics.checker import Invalid, Valid, check_certificate, check_proof, read_certificate, split_certificates
from trics.prover import Proof, ProofStep, write_certificate
from trics.terms import atom, eq


def test_golden_proofs_valid(golden):
    for _, _, pf in golden:
        v = check_proof(pf)
        assert isinstance(v, Valid) and v.steps == len(pf.steps), (pf.task.name, v)


def test_mutations_rejected(golden):
    total = 0
    for _, _, pf in golden:
        for what, m in mutations(pf):
            total += 1
            assert isinstance(check_proof(m), Invalid), (pf.task.name, what)
    assert total > 200


def test_mutated_premise_reports_its_step(ex1_proofs):
    pf = ex1_proofs[0]
    st = pf.steps[2]
    steps = list(pf.steps)
    steps[2] = replace(st, premises=(1,) + st.premises[1:])
    v = check_proof(Proof(pf.task, steps, pf.status))
    assert not v and v.step == st.index


def test_wrong_qed_atom(ex1_proofs):
    pf = ex1_proofs[1]
    steps = list(pf.steps)
    steps[-1] = replace(steps[-1], premises=(2,))
    v = check_proof(Proof(pf.task, steps, pf.status))
    assert not v and v.step == len(steps)


def test_witness_must_be_fresh(ex2_stages):
    pf = ex2_stages[3].proof
    i = next(i for i, s in enumerate(pf.steps) if s.kind == "witness")
    st = pf.steps[i]
    steps = list(pf.steps)
    steps[i] = replace(st, witnesses=("bisa",), atoms=(atom("line", "pOc1", "pMa1", "bisa"),))
    v = check_proof(Proof(pf.task, steps, pf.status))
    assert not v and "fresh" in v.reason


def test_ill_sorted_instantiation(ex1_proofs):
    pf = ex1_proofs[0]
    st = pf.steps[0]                   # bc_unique with L -> a1
    steps = list(pf.steps)
    steps[0] = replace(st, instantiation=(("L", "pA"),))
    v = check_proof(Proof(pf.task, steps, pf.status))
    assert not v and v.step == 1


def test_malformed_input_never_raises(ex1_proofs):
    pf = ex1_proofs[0]
    junk = [
        [],
        [ProofStep(1, (), "QEDas", "qed", premises=())],
        [ProofStep(1, (eq("a1", "bc"),), "bc_unique", "mp", (("L",),), (1,))],
        [ProofStep(3, (eq("a1", "bc"),), "bc_unique", "mp")],
        [ProofStep(1, (eq("a1", "bc"),), "nonsense", "mp"), ProofStep(2, (), "QEDas", "qed", premises=(1,))],
        [ProofStep(1, (eq("a1", "bc"),), "bc_unique", "mp", premises=("hx",))],
        [ProofStep(1, (eq("a1", "bc"),), "bc_unique", "guess")],
    ]
    for steps in junk:
        assert isinstance(check_proof(Proof(pf.task, steps, "Proved")), Invalid)
    assert isinstance(check_proof(None), Invalid)


def test_certificate_round_trip(golden, kb):
    for _, _, pf in golden:
        text = write_certificate(pf)
        assert text.startswith(f"% task: {pf.task.name}\n")
        back = read_certificate(text, kb)
        assert [(s.atoms, s.rule, s.kind, s.instantiation, s.premises) for s in back.steps[:-1]] == \
               [(s.atoms, s.rule, s.kind, s.instantiation, s.premises) for s in pf.steps[:-1]]
        assert check_certificate(text, kb)


def test_certificate_tampering(ex2_proofs, kb):
    text = write_certificate(ex2_proofs[1])
    assert check_certificate(text, kb)
    # conclusion changed to something the rule does not give
    bad = text.replace("29. pG = pG1 (", "29. pG = pMa1 (")
    assert not check_certificate(bad, kb)
    # axiom digest changed
    lines = text.splitlines(keepends=True)
    k = next(i for i, l in enumerate(lines) if l.startswith("% axiom "))
    lines[k] = lines[k][:-5] + "0000\n"
    assert not check_certificate("".join(lines), kb)
    # instantiation changed
    assert not check_certificate(text.replace("instantiation: L -> a1", "instantiation: L -> ha1"), kb)
    # garbage
    assert not check_certificate("% task: x\n% goal: a1 = bc\n1. ???\n", kb)
    assert not check_certificate("", kb)


def test_split_certificates(ex1_proofs):
    text = "".join(write_certificate(p) for p in ex1_proofs)
    parts = split_certificates(text)
    assert len(parts) == 2 and all(p.startswith("% task:") for p in parts)
