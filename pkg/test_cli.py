"""
End-to-end tests of the desattack command line
"""

import json
import os
import sys

# Add the project root to the path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import pytest

from src.cli.main import run_cli
from src.model_io.parser import load_model

MODELS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "models")


def model(name):
    return os.path.join(MODELS, name)


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", model("fix_del.desa"))
    assert code == 0
    assert "automaton G: 3 states, 2 transitions" in out
    assert "attack on G: 1 attacked transitions" in out
    assert out.strip().endswith("valid")


def test_validation_error_exits_2_with_position(capsys, tmp_path):
    bad = tmp_path / "bad.desa"
    bad.write_text("automaton G\nalphabet:\n  a : unobs sen-attack\ninitial: q0\nend\n", encoding="utf-8")
    code, out, err = run(capsys, "validate", str(bad))
    assert code == 2
    assert out == ""
    assert f"{bad}:3:" in err


def test_missing_file_and_unknown_flag_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "validate", str(tmp_path / "missing.desa"))
    assert code == 2 and err.startswith("error:")
    code, _, err = run(capsys, "validate", model("fix_lin.desa"), "--colour")
    assert code == 2
    assert "usage:" in err


def test_decomposability_counterexample_and_extension(capsys):
    code, out, _ = run(capsys, "check-cd", model("closure_ab.desa"), "--s1", "a", "--s2", "b")
    assert code == 1
    assert "counterexample: b" in out
    code, out, _ = run(capsys, "check-cd", model("closure_ab.desa"), "--s1", "a", "--s2", "b", "--extend")
    assert code == 0
    assert "conditionally decomposable" in out


def test_observer_then_estimate(capsys, tmp_path):
    obs = str(tmp_path / "obs.desa")
    code, out, _ = run(capsys, "observer", model("fix_del.desa"), "--safe", "q0,q1", "-o", obs)
    assert code == 0
    assert "estimate" in out
    code, out, _ = run(capsys, "estimate", obs, "--trace", "")
    assert code == 0
    assert out.strip() == "estimate after ε: {q0,q1}"
    code, out, _ = run(capsys, "estimate", obs, "--trace", "b", "--json")
    assert json.loads(out)["estimate"] == {"states": [], "off_domain": True}


def test_synthesize_and_large_language(capsys, tmp_path):
    sup = str(tmp_path / "sup.desa")
    code, out, _ = run(capsys, "synthesize", model("fix_del.desa"), "--safe", "q0,q1", "-o", sup)
    assert code == 0
    assert "(otherwise)" in out
    assert load_model(sup).supervisor("S").name == "S"

    la = str(tmp_path / "la.desa")
    code, out, _ = run(capsys, "large-lang", model("fix_del.desa"), sup, "-o", la, "--depth", "4", "--oracle")
    assert code == 0
    assert out.splitlines()[2:4] == ["  ε", "  a"]
    assert "oracle: agrees up to length 4" in out
    assert load_model(la).automaton().name == "La(G)"


def test_synthesis_precondition_failure_exits_2(capsys, tmp_path):
    code, out, err = run(capsys, "synthesize", model("fix_conf.desa"), "--safe", "q0,q1,q2,q3",
                         "-o", str(tmp_path / "sup.desa"))
    assert code == 2
    assert "CA-observability fails" in err
    assert "(a, c)" in err


def test_observability_plain_and_json_agree(capsys):
    args = ("check-co", model("fix_conf.desa"), "--safe", "q0,q1,q2,q3", "--oracle", "--depth", "4")
    code, out, _ = run(capsys, *args)
    assert code == 1
    assert "CA-observability: FAILS, witness (a, c)" in out
    assert "CA-observability up to depth 4: FAILS" in out

    json_code, json_out, _ = run(capsys, *args, "--json")
    data = json.loads(json_out)
    assert json_code == code
    assert data["verdict"]["holds"] is False
    assert (data["verdict"]["witness"], data["verdict"]["event"]) == (["a"], "c")
    assert data["oracle"]["holds"] is False


def test_controllability(capsys):
    code, out, _ = run(capsys, "check-cc", model("fix_del.desa"), "--safe", "q0,q1")
    assert code == 0
    assert out.startswith("CA-controllability: holds")
    code, _, err = run(capsys, "check-cc", model("fix_del.desa"), "--safe", "q0,q7")
    assert code == 2
    assert "q7" in err


def test_observer_property(capsys, tmp_path):
    code, _, _ = run(capsys, "check-op", model("coord_g2.desa"), "--events", "c")
    assert code == 0

    branch = tmp_path / "branch.desa"
    branch.write_text("automaton B\nalphabet:\n  a\n  b\n  c\ninitial: q0\ntrans:\n"
                      "  q0 a q1\n  q1 c q2\n  q0 b q3\nend\n", encoding="utf-8")
    code, out, _ = run(capsys, "check-op", str(branch), "--events", "c")
    assert code == 1
    assert "witness (b, c)" in out


def test_compose_project_expand_enumerate(capsys, tmp_path):
    composed = str(tmp_path / "g.desa")
    code, _, _ = run(capsys, "compose", model("coord_g1.desa"), model("coord_g2.desa"), "-o", composed, "--name", "G")
    assert code == 0
    g = load_model(composed).automaton("G")
    assert g.alphabet.events == {"a", "b", "c"}

    projected = str(tmp_path / "p.desa")
    code, _, _ = run(capsys, "project", composed, "--alphabet", "a,b", "-o", projected)
    assert code == 0
    code, out, _ = run(capsys, "enumerate", projected, "--max-len", "3")
    assert out.splitlines() == ["ε", "a", "a b"]

    expanded = str(tmp_path / "ga.desa")
    code, out, _ = run(capsys, "attack-expand", model("fix_del.desa"), model("fix_del.desa"), "-o", expanded)
    assert code == 0
    ga = load_model(expanded).automaton()
    assert len(ga.states) == 4 and len(ga.inserted) == 1

    code, out, _ = run(capsys, "enumerate", model("fix_lin.desa"), "--max-len", "2", "--json")
    assert json.loads(out)["strings"] == [[], ["a"], ["a", "b"]]


def test_coordinate_verify_and_simulate(capsys, tmp_path):
    out_dir = str(tmp_path / "out")
    code, out, _ = run(capsys, "coordinate", model("coord_g1.desa"), model("coord_g2.desa"), model("coord_k.desa"),
                       "--extend", "-o", out_dir)
    assert code == 0
    assert out.splitlines()[-1] == "coordination: local supervisors synthesized"
    for name in ("coordination.desa", "report.txt", "report.json"):
        assert os.path.exists(os.path.join(out_dir, name))
    with open(os.path.join(out_dir, "report.json"), encoding="utf-8") as file:
        assert json.load(file)["holds"] is True

    code, out, _ = run(capsys, "verify-coord", out_dir)
    assert code == 0
    assert "La(S1 & S2) = K: holds" in out

    args = ("simulate", out_dir, "--runs", "10", "--depth", "5", "--seed", "7")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second
    assert first[0] == 0
    assert "violations: 0" in first[1]


def test_failed_coordination_exits_1(capsys, tmp_path):
    g1 = tmp_path / "g1.desa"
    g2 = tmp_path / "g2.desa"
    g1.write_text("automaton G1\nalphabet:\n  a\ninitial: p0\ntrans:\n  p0 a p1\nend\n", encoding="utf-8")
    g2.write_text("automaton G2\nalphabet:\n  b\ninitial: r0\ntrans:\n  r0 b r1\nend\n", encoding="utf-8")
    out_dir = str(tmp_path / "out")
    code, out, _ = run(capsys, "coordinate", str(g1), str(g2), model("closure_ab.desa"), "-o", out_dir)
    assert code == 1
    assert "counterexample: b" in out
    code, _, err = run(capsys, "verify-coord", out_dir)
    assert code == 2
    assert "sup1" in err or "plant1" in err


def test_samples_are_valid(capsys, tmp_path):
    code, out, _ = run(capsys, "samples", "-o", str(tmp_path))
    assert code == 0
    assert "(safe states q0,q1)" in out
    for name in sorted(os.listdir(tmp_path)):
        assert run(capsys, "validate", str(tmp_path / name))[0] == 0


@pytest.mark.parametrize("args", [
    (model("fix_conf.desa"), "--safe", "q0,q1,q2,q3"),
    (model("fix_del.desa"), "--name", "Fdel"),
])
def test_render(capsys, tmp_path, args):
    html = str(tmp_path / "graph.html")
    code, out, _ = run(capsys, "render", args[0], "-o", html, *args[1:])
    assert code == 0
    assert os.path.getsize(html) > 0
    assert "rendered to" in out
