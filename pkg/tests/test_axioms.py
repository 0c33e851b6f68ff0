import pytest

from bninterp.axioms import AxiomTable, AxiomTableError


def test_default_table_loads():
    t = AxiomTable.default()
    for aid in ("p3_interpolation", "base_nonspecial", "nonspecial_line_bundle", "twist_to_untwist",
                "bn_membership", "quadrics_exception"):
        assert aid in t
    assert "[joint] Proposition 4.11" in t["twist_to_untwist"].citation


def test_patterns():
    t = AxiomTable.default()
    assert t["base_nonspecial"].applies(12, 6)
    assert not t["base_nonspecial"].applies(11, 6)
    assert t["p3_interpolation"].applies(6, 3, 3) and not t["p3_interpolation"].applies(6, 3, 4)
    assert t["quadrics_exception"].applies(9, 6)
    assert t["bn_membership"].applies(1, 100)


def test_parse_errors(tmp_path):
    with pytest.raises(AxiomTableError):
        AxiomTable.parse("only two | fields\n")
    with pytest.raises(AxiomTableError):
        AxiomTable.parse("x | __import__('os') | bad\n")
    with pytest.raises(AxiomTableError):
        AxiomTable.parse("x | * | a\nx | * | b\n")
    p = tmp_path / "ax.txt"
    p.write_text("# comment only\n\n", encoding="utf-8")
    assert len(AxiomTable.load(p)) == 0


def test_resolve():
    t = AxiomTable.parse("a | d >= 2*g | cite a\n")
    cited, missing, bad = t.resolve([("a", (5, 2, 4)), ("a", (3, 2, 4)), ("b", None)])
    assert [c["id"] for c in cited] == ["a"]
    assert missing == ["b"] and bad == ["a at (3, 2, 4)"]
