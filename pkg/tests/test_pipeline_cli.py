import itertools
import json
import math

import pytest

from symdet import cli, pipeline
from symdet import circuits as cc


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_forge_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    ga = tmp_path / "g.json"
    assert run("forge", "--n", 10, "--seed", 3, "--report", a, "--out", ga) == 0
    assert run("forge", "--n", 10, "--seed", 3, "--report", b) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["rank_trace"][-1] == 10
    assert json.loads(ga.read_text())["left"] == 10


def test_det_and_cross_check(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps([[2, 1], [7, 4]]))
    assert run("det", "--matrix", m, "--cross-check", "--mod", 5) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["det"] == "1" and res["cofactor"] == "1" and res["det_mod"] == 1
    t = tmp_path / "m.txt"
    t.write_text("2 2\n2 1\n7 4\n")
    assert run("det", "--matrix", t) == 0
    assert json.loads(capsys.readouterr().out)["det"] == "1"


def test_perm_matches(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps([[1, 1, 0], [0, 1, 1], [1, 0, 1]]))
    assert run("perm", "--matrix", m, "--cross-check") == 0
    assert "2" in capsys.readouterr().out


def test_cfi_det_q3(tmp_path):
    out = tmp_path / "d.json"
    assert run("cfi", "det", "--base", "q3", "--mode", "two-factor", "--out", out) == 0
    res = json.loads(out.read_text())
    assert res["det_M"] == "-196608" and res["negated"] and res["v2_det_M"] == 16


def test_game_solve_and_play(tmp_path):
    cfg = tmp_path / "g.json"
    cfg.write_text(json.dumps({"M": [[1, 0], [0, 1]], "N": [[0, 1], [1, 0]], "k": 2, "group": "trivial"}))
    out = tmp_path / "s.json"
    assert run("game", "solve", "--config", cfg, "--out", out) == 0
    assert "spoiler" in out.read_text().lower()
    tr = tmp_path / "t.jsonl"
    run("game", "play", "--config", cfg, "--spoiler", "greedy", "--duplicator", "identity", "--transcript", tr)
    lines = tr.read_text().splitlines()
    assert json.loads(lines[-1])["outcome"] == "SpoilerWin"


def test_circuit_commands(tmp_path):
    c = tmp_path / "c.json"
    c.write_text(cc.dumps(cc.build_ryser_circuit(3)))
    m = tmp_path / "m.json"
    m.write_text(json.dumps([[1, 2, 0], [0, 1, 1], [3, 0, 1]]))
    out = tmp_path / "o.json"
    assert run("circuit", "eval", "--circuit", c, "--matrix", m, "--out", out) == 0
    mm = [[1, 2, 0], [0, 1, 1], [3, 0, 1]]
    want = sum(math.prod(mm[i][p[i]] for i in range(3)) for p in itertools.permutations(range(3)))
    assert json.loads(out.read_text())["value"] == str(want)
    assert run("circuit", "check-sym", "--circuit", c, "--group", "sym_x_sym", "--out", out) == 0
    assert run("circuit", "supports", "--circuit", c, "--group", "sym_x_sym", "--out", out) == 0


def test_manifest_and_errors(tmp_path, capsys):
    man = tmp_path / "man.json"
    rep = tmp_path / "r.json"
    assert run("--manifest", man, "forge", "--n", 8, "--seed", 0, "--report", rep) == 0
    mf = json.loads(man.read_text())
    assert mf["command"] == "forge" and mf["seed"] == 0 and str(rep) in mf["outputs"]
    assert run("det", "--matrix", tmp_path / "missing.json") == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"M": [[1]], "N": [[1]], "k": 1, "group": "nope"}))
    assert run("game", "solve", "--config", bad) == 2


def test_lemmas_cli():
    assert run("lemmas", "--target", "determinant") == 0


def test_stage_error_names_stage():
    with pytest.raises(pipeline.StageError) as ei:
        pipeline.pipeline_determinant(7, 0, 1)
    assert ei.value.stage


def test_lemma_rows_format():
    rows = pipeline.lemma_suite("sign")
    assert rows and all(r.passed for r in rows)
    assert all(r.line().endswith(("PASS", "FAIL")) for r in rows)
