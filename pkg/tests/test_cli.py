"""End-to-end command-line tests: dispatch, exit codes, report determinism."""

import json
from fractions import Fraction as F

import pytest

from contlogic.cli import run
from contlogic.structures import gen_halfgraph, gen_prob_algebra
from contlogic.synthesis import GridFunction


@pytest.fixture()
def algebra_file(tmp_path):
    M = gen_prob_algebra([F(1, 2), F(1, 2)])
    path = tmp_path / "algebra.json"
    path.write_text(json.dumps(M.to_json()))
    return str(path)


@pytest.fixture()
def halfgraph_file(tmp_path):
    M = gen_halfgraph(8)
    path = tmp_path / "halfgraph.json"
    path.write_text(json.dumps(M.to_json()))
    return str(path)


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_check_valid_algebra(capsys, algebra_file):
    code, report = run_json(capsys, ["check", algebra_file])
    assert code == 0
    assert report["report"]["valid"] is True
    assert report["tool"] == "contlogic"
    import contlogic

    assert report["version"] == contlogic.__version__
    assert report["command"][0] == "check"
    assert algebra_file in report["inputs"]
    assert len(report["inputs"][algebra_file]) == 64  # sha256 hex


def test_eval_apa_sentence(capsys, algebra_file):
    code, report = run_json(capsys, [
        "eval", algebra_file,
        "-e", "sup x. inf y. |mu(meet(y,x)) - half(mu(x))|",
    ])
    assert code == 0
    assert report["report"]["value"] == "1/4"


def test_eval_with_binding(capsys, algebra_file):
    code, report = run_json(capsys, ["eval", algebra_file, "-e", "mu(x)", "--let", "x=s3"])
    assert code == 0
    assert report["report"]["value"] == "1"


def test_stability_ladder_length_8(capsys, halfgraph_file):
    code, report = run_json(capsys, [
        "stability", halfgraph_file, "--formula", "phi(x,y)", "--split", "x;y",
        "--epsilon", "1", "--kind", "antisym", "--max-len", "8",
    ])
    assert code == 0
    assert report["report"]["length"] == 8
    assert report["report"]["revalidated"] is True


def test_nvalue_constant(capsys, tmp_path):
    M = gen_prob_algebra([F(1)])
    path = tmp_path / "trivial.json"
    path.write_text(json.dumps(M.to_json()))
    code, report = run_json(capsys, [
        "nvalue", str(path), "--formula", "mu(meet(x,y))", "--split", "x;y",
        "--epsilon", "1/2",
    ])
    assert code == 0
    assert report["report"]["N"] >= 2


def test_imaginary_two_classes(capsys, tmp_path):
    M = gen_halfgraph(1)
    path = tmp_path / "two.json"
    path.write_text(json.dumps(M.to_json()))
    out_base = tmp_path / "imag"
    code, report = run_json(capsys, [
        "imaginary", str(path), "--formula", "d(x,y)", "--split", "x;y",
        "--out", str(out_base),
    ])
    assert code == 0
    assert report["report"]["class_count"] == 2
    assert report["report"]["all_zero"] is True
    files = report["report"]["written"]
    assert all(tmp_path.joinpath(p).exists() or p for p in files)
    sidecar = json.loads((tmp_path / "imag.classes.json").read_text())
    assert len(sidecar) == 2


def test_typespace(capsys, algebra_file):
    code, report = run_json(capsys, [
        "typespace", algebra_file, "--formula", "mu(meet(x,y))", "--split", "x;y",
    ])
    assert code == 0
    assert report["report"]["point_count"] == 4


def test_define_median(capsys, algebra_file):
    code, report = run_json(capsys, [
        "define-median", algebra_file, "--formula", "mu(meet(x,y))", "--split", "x;y",
        "--epsilon", "1/4", "--target", "s1",
    ])
    assert code == 0
    body = report["report"]
    assert F(body["observed_error"]) <= F(1, 4)
    assert len(body["parameters"]) == 2 * body["N"] - 1


def test_define_median_abort_exit_code(capsys, tmp_path):
    M = gen_halfgraph(2)
    path = tmp_path / "hg.json"
    path.write_text(json.dumps(M.to_json()))
    vec = {"values": {"a0": "1", "a1": "0", "b0": "1", "b1": "0"}}
    tf = tmp_path / "target.json"
    tf.write_text(json.dumps(vec))
    code, report = run_json(capsys, [
        "define-median", str(path), "--formula", "phi(x,y)", "--split", "x;y",
        "--epsilon", "1/8", "--target-file", str(tf),
    ])
    assert code == 1
    assert "aborted" in report["report"]


def test_define_global(capsys, algebra_file):
    code, report = run_json(capsys, [
        "define-global", algebra_file, "--formula", "mu(meet(x,y))", "--split", "x;y",
        "--target", "s2", "--depth", "3",
    ])
    assert code == 0
    assert report["report"]["error_bound"] == "1/4"


def test_glue_verify(capsys, tmp_path):
    from contlogic.language import PLMonotone, PredDecl, SortDecl
    from contlogic.structures import FiniteStructure

    base = gen_halfgraph(1)
    ident = PLMonotone.identity()
    sig = base.sig.extended(sorts=[SortDecl("E", "d_E")],
                            predicates=[PredDecl("psi", ("V", "V"), (ident, ident))])
    carriers = dict(base.carriers)
    carriers["E"] = ["e0", "e1"]
    metric = dict(base.metric)
    metric["E"] = [[F(0), F(1)], [F(1), F(0)]]
    predicates = {name: dict(t) for name, t in base.predicates.items()}
    n = len(base.carriers["V"])
    predicates["psi"] = {(i, j): base.predicates["phi"][(j, i)]
                         for i in range(n) for j in range(n)}
    M = FiniteStructure(sig, carriers, metric, {}, predicates)
    path = tmp_path / "glued.json"
    path.write_text(json.dumps(M.to_json()))
    code, report = run_json(capsys, [
        "glue", str(path), "--phi", "phi(x,y)", "--psi", "psi(x,z)",
        "--shared", "x", "--fresh", "t,w", "--fresh-sort", "E", "--verify",
    ])
    assert code == 0
    assert report["report"]["identities"] == {
        "recovers_phi_at_distance_1": True,
        "recovers_psi_at_distance_0": True,
    }


def test_cbrank(capsys, tmp_path):
    space = {
        "points": ["p", "q", "r"],
        "closed_sets": [[], ["p"], ["p", "q"], ["p", "q", "r"]],
        "metric": [["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]],
        "test_epsilons": [],
    }
    path = tmp_path / "space.json"
    path.write_text(json.dumps(space))
    code, report = run_json(capsys, ["cbrank", str(path), "--epsilon", "1/2"])
    assert code == 0
    assert report["report"]["ranks"] == {"p": 2, "q": 1, "r": 0}


def test_synth(capsys, tmp_path):
    axis = [F(k, 8) for k in range(9)]
    target = GridFunction(1, F(1, 8), {(t,): min(2 * t, F(1)) for t in axis})
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(target.to_json()))
    code, report = run_json(capsys, ["synth", "--target", str(path), "--epsilon", "1/8"])
    assert code == 0
    assert F(report["report"]["max_error"]) <= F(1, 8)


def test_modulus_convert(capsys):
    code, report = run_json(capsys, [
        "modulus-convert", "--direction", "inverse-to-delta",
        "--pl", "0:0,1:1", "--epsilon", "1/4",
    ])
    assert code == 0
    assert report["report"]["delta"] == "1/4"
    code, report = run_json(capsys, [
        "modulus-convert", "--direction", "delta-to-inverse", "--pl", "0:0,1:1",
    ])
    assert code == 0
    assert report["report"]["inverse"] == "0:0,1:1"


def test_prenex_command(capsys, algebra_file):
    code, report = run_json(capsys, [
        "prenex", algebra_file, "--formula", "1/4 -. (sup x. mu(x))",
    ])
    assert code == 0
    assert report["report"]["prenex"].startswith("inf ")


def test_usage_error_exit_2(capsys):
    assert run(["no-such-command"]) == 2
    assert run([]) == 2


def test_reports_are_byte_identical(capsys, algebra_file):
    argv = ["eval", algebra_file, "-e", "sup x. mu(x)"]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    second = capsys.readouterr().out
    assert first == second


def test_grammar_error_diagnostic(capsys, algebra_file):
    code = run(["eval", algebra_file, "-e", "sup x mu(x)"])
    captured = capsys.readouterr()
    assert code == 1
    assert "contlogic:" in captured.err


def test_decimal_epsilon_rejected(capsys, halfgraph_file):
    code = run(["nvalue", halfgraph_file, "--formula", "phi(x,y)", "--split", "x;y",
                "--epsilon", "0.5"])
    captured = capsys.readouterr()
    assert code == 1
    assert "decimal" in captured.err
