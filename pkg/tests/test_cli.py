import json

import pytest

from bninterp.cli import DEFAULT_SEED, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_points(capsys):
    code, out, _ = run(capsys, "points", "6", "2")
    assert code == 0 and "f = 9" in out and "9 general points" in out
    code, out, _ = run(capsys, "points", "9", "6", "--json")
    js = json.loads(out)
    assert js["f"] == 13 and "del Pezzo" in js["constrained"]["note"]
    code, out, _ = run(capsys, "points", "--d", "100", "--g", "0", "--json")
    assert json.loads(out)["proofs"]["twisted"]["leaf_rules"] == ["BASE_NONSPECIAL"]
    code, out, _ = run(capsys, "points", "3", "5")
    assert code == 0 and "not Brill-Noether" in out


def test_prove_13_11(capsys, tmp_path):
    out_file = tmp_path / "t.json"
    code, out, _ = run(capsys, "prove", "13", "11", "twisted", "--json", "--out", str(out_file))
    assert code == 0
    js = json.loads(out)
    assert js["trace"]["leaf"]["terminal"]["split"]["split"] == [0, -1, -1]
    assert js["validation"]["ok"]
    assert json.loads(out_file.read_text(encoding="utf-8")) == js


def test_prove_is_byte_identical(capsys):
    a = run(capsys, "prove", "16", "9", "--json")[1]
    b = run(capsys, "prove", "16", "9", "--json")[1]
    assert a == b


def test_prove_empty_axioms_fails(capsys, tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("", encoding="utf-8")
    code, out, _ = run(capsys, "prove", "16", "15", "--axioms", str(empty))
    assert code == 1 and "missing from the axiom table" in out and "p3_interpolation" in out


def test_usage_errors(capsys):
    assert run(capsys, "prove", "3", "5")[0] == 2
    assert run(capsys, "prove", "10", "3", "sideways")[0] == 2
    assert run(capsys, "verify-leaf", "nope")[0] == 2
    assert run(capsys, "prove", "--axioms", "/nonexistent", "7", "3")[0] == 2
    with pytest.raises(SystemExit) as ex:
        main(["bogus"])
    assert ex.value.code == 2


def test_verify_leaf(capsys):
    code, out, _ = run(capsys, "verify-leaf", "12_10")
    assert code == 0 and "{0,0,0}" not in out and "[0, 0, 0]" in out
    code, out, _ = run(capsys, "verify-leaf", "sigma", "--json")
    assert code == 0 and json.loads(out)["ok"]


def test_verify_leaf_seeded(capsys):
    code, out, _ = run(capsys, "verify-leaf", "10_7", "--seed", "7", "--json")
    js = json.loads(out)
    assert code == 0 and js["terminal"]["certificate"]["seed"] == 7
    assert js["terminal"]["pattern"] == {"P100": 1, "P101": 1}
    assert DEFAULT_SEED == 0


def test_verify_table(capsys):
    code, out, _ = run(capsys, "verify-table")
    assert code == 0 and "27 cells, 0 failures" in out


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "30", "20", "twisted", "--json")
    js = json.loads(out)
    assert code == 0 and js["exceptions"] == [[6, 2], [8, 5], [9, 6], [10, 7]]
    code, out, _ = run(capsys, "sweep", "30", "20", "--mode", "untwisted")
    assert code == 0 and "exceptions: (6,2)\n" in out


def test_calc(capsys):
    code, out, _ = run(capsys, "calc", "N_line(-1)[p->q]")
    assert code == 0 and "{0,-1,-1}" in out and "interpolation yes" in out
    code, out, _ = run(capsys, "calc", "N_{9,5}(-1)", "--json")
    assert json.loads(out)["chi"] == 14
    code, _, err = run(capsys, "calc", "N_line(-1)[p->q")
    assert code == 2
    lines = err.splitlines()
    assert lines[-1].index("^") == lines[-2].index("N") + len("N_line(-1)[p->q")
    code, _, err = run(capsys, "calc", "N_line[p->q1][p->q2][p->q3]")
    assert code == 2 and "neither nested nor" in err
    code, out, _ = run(capsys, "calc", "N_conic(-1)[a->x]")
    assert code == 1
