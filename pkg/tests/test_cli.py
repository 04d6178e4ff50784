import json
import subprocess
import sys

import pytest

from adjoint_prover import calculus
from adjoint_prover.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def muddy_file(tmp_path):
    f = tmp_path / "muddy.assn"
    f.write_text("# child 1 after the father\nassn 1 s{1} => s{1}\n")
    return f


def test_prove_with_assumptions(capsys, muddy_file, tmp_path):
    proof = tmp_path / "proof.json"
    code, out, _ = call(capsys, "prove", "s{1} |- [1] s{1}", "--assn", str(muddy_file),
                        "--emit", str(proof))
    assert code == 0
    assert "(BoxR)" in out and "Assn" in out
    code, out, _ = call(capsys, "check", str(proof))
    assert code == 0 and out.startswith("ok")


def test_prove_unprovable(capsys):
    code, out, _ = call(capsys, "prove", "[A]p |- p")
    assert code == 1 and "not provable" in out


def test_prove_bounds(capsys):
    code, out, _ = call(capsys, "prove",
                        "<A>[A](p | q) |- (p & <A>[A](p | q)) | (q & <A>[A](p | q))",
                        "--max-depth", "2")
    assert code == 2


def test_prove_json(capsys):
    code, out, _ = call(capsys, "prove", "p & q |- q", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "proved" and doc["proof"]["rule"] == "AndL"


def test_countermodel(capsys):
    code, out, _ = call(capsys, "countermodel", "[A]p |- p")
    assert code == 1 and "fails at" in out
    code, out, _ = call(capsys, "countermodel", "<A>p & <A>q |- <A>(p & q)", "--format", "json")
    doc = json.loads(out)
    assert code == 1 and len(doc["countermodel"]["worlds"]) <= 3
    code, out, _ = call(capsys, "countermodel", "p |- p")
    assert code == 2


def test_decide(capsys):
    assert call(capsys, "decide", "p |- [A]<A>p")[0] == 0
    code, out, _ = call(capsys, "decide", "<A>p & <A>q |- <A>(p & q)")
    assert code == 1 and out.startswith("refuted")


def test_parse_error_reports_position(capsys):
    code, _, err = call(capsys, "prove", "p & |- q")
    assert code == 3
    assert "position 4" in err and "^" in err


def test_missing_file(capsys, tmp_path):
    assert call(capsys, "check", str(tmp_path / "nope.json"))[0] == 3
    assert call(capsys, "prove", "p |- p", "--assn", str(tmp_path / "nope"))[0] == 3


def test_bad_assumption_file(capsys, tmp_path):
    f = tmp_path / "bad.assn"
    f.write_text("assn 1 s{1} => s{1} & s{2}\n")
    assert call(capsys, "prove", "p |- p", "--assn", str(f))[0] == 3


def test_unknown_command(capsys):
    assert run(["frobnicate"]) == 3
    assert run(["decide", "p |- p", "--worlds", "0"]) == 3


def test_tampered_boxl_is_rejected(capsys, tmp_path):
    proof = tmp_path / "dup.json"
    assert call(capsys, "prove", "<A>[A](p | q) |- (p & <A>[A](p | q)) | (q & <A>[A](p | q))",
                "--emit", str(proof))[0] == 0
    doc = json.loads(proof.read_text())

    def tamper(node, where=()):
        if node["rule"] == "BoxL":
            # drop the kept principal item from the premiss
            prem = node["premisses"][0]
            ant, succ = prem["conclusion"].split("|-")
            prem["conclusion"] = "p | q |-" + succ
            return where
        for k, child in enumerate(node["premisses"]):
            hit = tamper(child, where + (k,))
            if hit is not None:
                return hit
        return None

    where = tamper(doc["proof"])
    assert where is not None
    proof.write_text(json.dumps(doc))
    code, out, _ = call(capsys, "check", str(proof))
    assert code == 3
    assert f"node {list(where)} (BoxL)" in out


def test_elimcut(capsys, tmp_path):
    left, right, out_file = tmp_path / "l.json", tmp_path / "r.json", tmp_path / "o.json"
    assert call(capsys, "prove", "p |- p | q", "--emit", str(left))[0] == 0
    assert call(capsys, "prove", "(p | q)^A |- <A>q | <A>p", "--emit", str(right))[0] == 0
    code, out, _ = call(capsys, "elimcut", str(left), str(right), "--path", "0", "--emit", str(out_file))
    assert code == 0 and "cases:" in out
    d, _ = calculus.loads(out_file.read_text())
    assert str(d.conclusion) == "(p)^A |- <A>(q) | <A>(p)"
    assert call(capsys, "check", str(out_file))[0] == 0
    assert call(capsys, "elimcut", str(left), str(right), "--path", "x")[0] == 3


def test_muddy(capsys, tmp_path):
    assn = tmp_path / "m.assn"
    code, out, _ = call(capsys, "muddy", "--n", "2", "--k", "2", "--round", "after_round(1)",
                        "--emit-assn", str(assn))
    assert code == 0 and "BAD" not in out
    assert "assn 1 s{1,2} => s{1,2}" in assn.read_text()
    code, out, _ = call(capsys, "muddy", "--n", "3", "--liar", "--round", "after_father", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and all(r["agrees"] for r in doc["queries"])
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 2, "k": 1, "round": "before_father"}))
    assert call(capsys, "muddy", "--config", str(cfg))[0] == 0
    assert call(capsys, "muddy", "--n", "2", "--k", "5")[0] == 3


def test_laws(capsys):
    code, out, _ = call(capsys, "laws", "--worlds", "2")
    assert code == 0 and out.startswith("18 frames, 0 violations")
    code, out, _ = call(capsys, "laws", "--worlds", "1", "--agents", "A,B", "--format", "json")
    assert code == 0 and json.loads(out)["violations"] == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "adjoint_prover", "prove", "p |- p"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "(Id)" in res.stdout
