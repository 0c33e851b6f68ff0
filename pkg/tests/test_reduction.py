import pytest

from bninterp.axioms import AxiomTable
from bninterp.bn_arith import BNPair, NotBrillNoether
from bninterp.reduction import (reduce, sweep, validate_trace, verify_table)


def rules(tr):
    return [(n.rule, n.pair) for n in tr.root.walk()]


def test_plus9_to_base():
    tr = reduce(BNPair(16, 15))
    assert rules(tr) == [("PLUS9", (16, 15)), ("BASE_NONSPECIAL", (7, 3))]
    assert tr.verdict == "GOOD" and validate_trace(tr) == []


def test_special_leaf_dispatch():
    tr = reduce(BNPair(13, 10))
    assert rules(tr) == [("LEAF", (13, 10))]
    assert tr.leaf_cases() == ["13_10"]


def test_exception_cites_quadrics():
    tr = reduce(BNPair(10, 7))
    assert tr.verdict == "EXCEPTION"
    assert [a["id"] for a in tr.axioms] == ["quadrics_exception"]
    assert "cited" in tr.reason


def test_plus3_chain_to_table():
    tr = reduce(BNPair(16, 9))
    assert rules(tr)[:2] == [("PLUS3", (16, 9)), ("TABLE_CERT", (13, 9))]
    cert = tr.root.children[0]
    assert cert.params["X"] == [6, 3] and cert.params["Y"] == [7, 3]


def test_nonspecial_range_wins():
    assert reduce(BNPair(19, 9)).root.rule == "BASE_NONSPECIAL"
    assert reduce(BNPair(12, 6)).root.rule == "BASE_NONSPECIAL"


def test_untwisted_mode():
    assert reduce(BNPair(6, 2), "untwisted").verdict == "EXCEPTION"
    for d, g, case in [(8, 5, "8_5_untwisted"), (9, 6, "9_6"), (10, 7, "10_7_untwisted")]:
        tr = reduce(BNPair(d, g), "untwisted")
        assert tr.verdict == "GOOD" and tr.leaf_cases() == [case]
    tr = reduce(BNPair(13, 11), "untwisted")
    assert tr.root.rule == "UNTWIST"
    assert any(a["id"] == "twist_to_untwist" for a in tr.axioms)


def test_run_leaves_folds_in_verdicts():
    tr = reduce(BNPair(13, 11), leaves="run")
    leaf = tr.root.leaf
    assert leaf["verdict"] == "GOOD"
    assert leaf["terminal"]["split"]["split"] == [0, -1, -1]


def test_errors():
    with pytest.raises(NotBrillNoether):
        reduce(BNPair(3, 5))
    with pytest.raises(ValueError):
        reduce(BNPair(3, 0, 3))
    with pytest.raises(ValueError):
        reduce(BNPair(10, 3), "sideways")


def test_deterministic():
    a = reduce(BNPair(29, 20)).dumps()
    assert a == reduce(BNPair(29, 20)).dumps()


def test_validator_catches_tampering():
    js = reduce(BNPair(16, 9)).to_json()
    js["trace"]["children"][0]["params"]["s"] = 3
    assert validate_trace(js)
    js = reduce(BNPair(16, 15)).to_json()
    js["trace"]["children"][0]["pair"] = [8, 3]
    assert validate_trace(js)
    js = reduce(BNPair(7, 3)).to_json()
    js["trace"]["rule"] = "MAGIC"
    assert validate_trace(js)


def test_recursion_depth_bound():
    for d in range(1, 41):
        for g in range(0, 31):
            p = BNPair(d, g)
            if not p.is_bn:
                continue
            depth = sum(1 for n in reduce(p).root.walk() if n.rule in ("PLUS9", "PLUS3"))
            assert depth <= g // 12 + d // 3 + 1


def test_empty_axiom_table_reports_inputs():
    tr = reduce(BNPair(16, 9), axioms=AxiomTable.empty())
    assert tr.verdict == "OPEN"
    assert set(tr.missing_axioms) == {"base_nonspecial", "bn_membership", "in_transverse",
                                      "p3_interpolation"}
    assert validate_trace(tr) == []


def test_pattern_violation_is_reported():
    table = AxiomTable.parse("base_nonspecial | d >= 100 | narrow\n")
    tr = reduce(BNPair(7, 3), axioms=table)
    assert tr.verdict == "OPEN" and tr.axiom_violations


def test_verify_table_cells():
    rep = verify_table()
    assert rep["ok"] and rep["count"] == 27 and rep["failures"] == []
    cells = {(c["d"], c["g"]): c for c in rep["cells"]}
    c = cells[(10, 6)]
    assert (c["X"], c["Y"], c["s"]) == ([6, 3], [4, 0], 4)
    c = cells[(15, 13)]
    assert (c["X"], c["Y"], c["s"]) == ([8, 5], [7, 3], 6)
    assert all(c["checks"].values())
    assert cells[(11, 8)]["kind"] == "special_leaf" and cells[(11, 8)]["case"] == "11_8"
    assert cells[(12, 6)]["kind"] == "base"
    assert sum(1 for c in rep["cells"] if c["kind"] == "special_leaf") == 5


def test_sweep_small():
    rep = sweep(10, 0)
    assert rep["ok"]
    assert all(r["leaf_rules"] == ["BASE_NONSPECIAL"] for r in rep["matrix"])
    assert [r["d"] for r in rep["matrix"]] == list(range(4, 11))
