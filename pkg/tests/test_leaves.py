import pytest

from bninterp import degeneration_leaves as dl
from bninterp.bundle_calculus import INTERPOLATION


@pytest.mark.parametrize("case,split,kind", [
    ("12_10", [0, 0, 0], "split_interpolation"),
    ("13_10", [-1, -1, -2], "split_h0_zero"),
    ("13_11", [0, -1, -1], "split_interpolation"),
    ("14_12", [-1, -1, -2], "split_h0_zero"),
])
def test_canonical_leaves(case, split, kind):
    tr = dl.run_leaf(case)
    assert tr.verdict == "GOOD"
    assert tr.terminal["kind"] == kind
    assert tr.terminal["split"]["split"] == split
    for st in tr.steps:
        assert st["chi_after"] - st["chi_before"] == st["delta"]
    assert "canonical_restriction" in tr.axioms


def test_13_10_line_restriction():
    tr = dl.run_leaf("13_10")
    restr = [c for c in tr.checks if c["check"].startswith("restriction")]
    assert restr and restr[0]["split"] == [0, -1, -1]


def test_14_12_has_no_sections():
    tr = dl.run_leaf("14_12")
    assert tr.terminal["split"]["h0"] == 0


def test_limits_are_flagged():
    tr = dl.run_leaf("12_10")
    limits = [s for s in tr.steps if s["rule"] == "limit_points"]
    assert limits and all(s["flags"] for s in limits)
    assert "semicontinuity" in tr.axioms


def test_9_5_leaf():
    tr = dl.run_leaf_9_5()
    assert tr.verdict == "GOOD"
    assert tr.terminal == {"kind": "axiom", "id": "joint_thm_1_3", "ok": True}
    chis = [c["value"] for c in tr.checks if c["check"] == "chi"]
    assert chis[:2] == [14, -1]
    check_one = [s for s in tr.steps if s["rule"] == "check_one_apply"][0]
    assert check_one["delta"] == -15


def test_8_5_untwisted_leaf():
    tr = dl.run_leaf("8_5_untwisted")
    assert tr.terminal["id"] == "k2_nonspecial"
    assert any(c["check"] == "canonical_k2" and c["value"] == 36 for c in tr.checks)


def test_constrained_arithmetic():
    tr = dl.run_constrained((8, 5))[0]
    assert [c["value"] for c in tr.checks] == [15, 15]
    tr = dl.run_constrained((9, 6))[0]
    assert tr.checks[0]["value"] == 16 and tr.verdict == "GOOD"
    assert "surface_del_pezzo" in tr.axioms
    out = dl.run_constrained((10, 7))
    assert out[0].checks[0]["value"] == 17
    quad = out[1]
    assert any(c["check"] == "surface_chi" and c["value"] == 10 for c in quad.checks)
    assert quad.terminal["pattern"] == {"P100": 1, "P101": 1}
    with pytest.raises(KeyError):
        dl.run_constrained((7, 3))


def test_sigma_identity():
    res = dl.sigma_identity()
    assert res["ok"] and res["t0"] and res["t1"] and res["spans_h0"]
    assert res["conditions_rank"] == 4


def test_divergence_is_reported():
    text = dl.resources.files("bninterp").joinpath("scripts", "12_10.leaf").read_text()
    bad = text.replace("assert_chi 15", "assert_chi 16", 1)
    assert bad != text
    with pytest.raises(dl.ReplayDivergence) as ex:
        dl.replay(dl.parse_script("12_10", bad))
    assert "expected 16" in str(ex.value)


def test_wrong_expected_expression_diverges():
    text = dl.resources.files("bninterp").joinpath("scripts", "13_11.leaf").read_text()
    lines = text.splitlines()
    i = next(k for k, ln in enumerate(lines) if ln.startswith("step peel_2_secant"))
    parts = lines[i].split(" | ")
    parts[2] = "N_{L2+L3+M+N}(-1)[p2->p2'][p3->p3']"
    lines[i] = " | ".join(parts)
    with pytest.raises(dl.ReplayDivergence):
        dl.replay(dl.parse_script("13_11", "\n".join(lines)))


def test_unknown_case_and_directive():
    with pytest.raises(KeyError):
        dl.load_script("nope")
    with pytest.raises(dl.ScriptError):
        dl.parse_script("x", "case x\nbogus 1\n")


def test_goal_gate():
    s = dl.load_script("14_12")
    assert s.goal == INTERPOLATION
    first = [ln for ln in s.body if ln.kind == "step"][0]
    e = dl.parse_expr(s.start, s.geometry)
    step, goal = dl.apply_rule(e, first.fields[0], dl._kv(first.fields[1]), s.goal)
    # h0-transfer rules are refused until check_one switches the goal
    with pytest.raises(dl.CalculusError):
        dl.apply_rule(step.output, "peel_3_secant_twist", {"line": "M"}, goal)


def test_static_axioms_cover_replay():
    for case in ("12_10", "13_11", "11_8", "9_5"):
        s = dl.load_script(case)
        assert set(dl.replay(s).axioms) <= set(s.axiom_ids())


def test_trace_json_is_deterministic():
    assert dl.run_leaf("13_10").dumps() == dl.run_leaf("13_10").dumps()
