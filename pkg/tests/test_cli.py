import json

import pytest

from trics import tptp
from trics.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_a_ha_o(capsys, tmp_path):
    plan_file = tmp_path / "ex1.plan"
    code, out, _ = run(capsys, "solve", "A", "Ha", "O", "--plan-out", str(plan_file))
    assert code == 0
    assert out.splitlines()[0] == "1. Construct the line l1 = AHa."
    assert "IntersectLineCircle(l2, c)" in plan_file.read_text()


def test_solve_unsolved(capsys):
    code, _, err = run(capsys, "solve", "Ha", "Hb", "Hc")
    assert code == 2 and "NoDetermination" in err


@pytest.mark.parametrize("argv", [
    ["solve", "A", "Ha"],
    ["solve", "A", "X", "O"],
    ["solve", "A", "A", "O"],
    ["frobnicate"],
    [],
    ["verify", "--plan", "/nonexistent/plan", "--trials", "3"],
    ["verify", "--plan", "x", "--trials", "0"],
    ["prove", "A", "Ha", "O", "--timeout", "-1"],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 64


def test_bad_plan_file_is_usage_error(capsys, tmp_path):
    f = tmp_path / "bad.plan"
    f.write_text("# given: A Ha O\nl1 = Teleport(A)\n")
    code, _, _ = run(capsys, "verify", "--plan", str(f))
    assert code == 64


def test_bad_seed_env(capsys, tmp_path, monkeypatch):
    plan = tmp_path / "p.plan"
    run(capsys, "solve", "A", "Ha", "O", "--plan-out", str(plan))
    monkeypatch.setenv("TRICS_SEED", "nope")
    code, _, _ = run(capsys, "verify", "--plan", str(plan), "--trials", "2")
    assert code == 64


def test_prove_a_ha_o(capsys, tmp_path):
    cert = tmp_path / "ex1.cert"
    code, out, _ = run(capsys, "prove", "A", "Ha", "O", "--certificate", str(cert))
    assert code == 0
    assert out.count("Proved by assumption! (by QEDas)") == 2
    code, out, _ = run(capsys, "check-cert", str(cert))
    assert code == 0 and out.count("valid") == 2


def test_check_cert_rejects_tampering(capsys, tmp_path):
    cert = tmp_path / "ex1.cert"
    run(capsys, "prove", "A", "Ha", "O", "--certificate", str(cert))
    cert.write_text(cert.read_text().replace("L -> a1", "L -> ha1"))
    code, out, _ = run(capsys, "check-cert", str(cert))
    assert code == 1 and "invalid" in out


def test_prove_staged(capsys, tmp_path):
    from conftest import EX2_STAGES

    stages = tmp_path / "aog.stages"
    stages.write_text(EX2_STAGES)
    code, out, _ = run(capsys, "prove", "A", "O", "G", "--stages", str(stages))
    assert code == 0
    assert "Let w1 be such that line(pOc1, pMa1, w1)" in out


def test_prove_failing_stage(capsys, tmp_path):
    stages = tmp_path / "bad.stages"
    stages.write_text("lm : pHa1 = pMa\n")
    code, _, _ = run(capsys, "prove", "A", "Ha", "O", "--stages", str(stages))
    assert code == 1


def test_prove_unsolved(capsys):
    code, _, _ = run(capsys, "prove", "Ha", "Hb", "Hc")
    assert code == 2


def test_verify(capsys, tmp_path):
    plan = tmp_path / "p.plan"
    run(capsys, "solve", "A", "O", "G", "--plan-out", str(plan))
    code, out, _ = run(capsys, "verify", "--plan", str(plan), "--trials", "25", "--tol", "1e-9", "--seed", "4")
    assert code == 0 and "passed  25" in out
    wrong = tmp_path / "w.plan"
    wrong.write_text(plan.read_text().replace("PerpThrough(l1, P1)", "LineThrough(A, P1)"))
    code, out, _ = run(capsys, "verify", "--plan", str(wrong), "--trials", "5")
    assert code == 1 and "seed" in out


def test_seed_env_var(capsys, tmp_path, monkeypatch):
    plan = tmp_path / "p.plan"
    run(capsys, "solve", "A", "Ha", "O", "--plan-out", str(plan))
    wrong = tmp_path / "w.plan"
    wrong.write_text(plan.read_text().replace("PerpThrough(l1, Ha)", "LineThrough(A, Ha)"))
    monkeypatch.setenv("TRICS_SEED", "1000")
    _, out, _ = run(capsys, "verify", "--plan", str(wrong), "--trials", "2")
    assert "seed     1000" in out


def test_export(capsys, tmp_path):
    out_file = tmp_path / "ex1.p"
    code, _, _ = run(capsys, "export-tptp", "A", "Ha", "O", "--out", str(out_file))
    assert code == 0
    units = tptp.parse(out_file.read_text())
    assert [u.name for u in units if u.role == "conjecture"] == ["th_A_Ha_O"]
    code, _, _ = run(capsys, "export-tptp", "Ha", "Hb", "Hc", "--out", str(out_file))
    assert code == 2


def test_render_svg(capsys, tmp_path):
    plan = tmp_path / "p.plan"
    run(capsys, "solve", "A", "Ha", "O", "--plan-out", str(plan))
    svg = tmp_path / "f.svg"
    code, _, _ = run(capsys, "render-svg", "--plan", str(plan), "--seed", "2", "--out", str(svg))
    assert code == 0 and svg.read_text().startswith("<svg")


def test_kb_validate(capsys):
    code, out, _ = run(capsys, "kb-validate", "--trials", "2", "--seed", "1")
    assert code == 0 and "rules pass over 2 diagrams" in out


def test_corpus_command(capsys, tmp_path):
    rows = tmp_path / "rows.jsonl"
    code, out, _ = run(capsys, "corpus", "--trials", "3", "--out", str(rows))
    assert code == 0
    data = [json.loads(l) for l in rows.read_text().splitlines()]
    assert len(data) == 35
    assert "problems 35" in out


def test_help_exit_zero(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "solve" in out
