import itertools
import random

import pytest

from bninterp import bundle_calculus as bc
from bninterp.bundle_calculus import Mod, SplitBundle
from bninterp.exprparse import ExprSyntaxError, parse_expr


def S(*a):
    return SplitBundle.of(a)


def test_split_bundle_basics():
    s = S(-1, 2, 0)
    assert s.degrees == (2, 0, -1)
    assert (s.rank, s.deg, s.chi, s.h0, s.h1) == (3, 1, 4, 4, 0)
    assert not s.is_balanced and S(1, 0, 0).is_balanced
    with pytest.raises(ValueError):
        SplitBundle.of([])


@pytest.mark.parametrize("degs,want", [((0, 0, 0), True), ((0, -1, -1), True),
                                       ((1, -1), False), ((-1, -1, -2), False),
                                       ((2, 2, 2), True)])
def test_interpolation_split_examples(degs, want):
    assert bc.interpolation_split(S(*degs)) is want


def test_interpolation_matches_oracle_everywhere():
    for rank in range(1, 5):
        for degs in itertools.combinations_with_replacement(range(-3, 7), rank):
            s = S(*degs)
            assert bc.interpolation_split(s) == bc.interpolation_oracle(s), degs


def test_twist_ledger():
    e = parse_expr("N_line(-1)(p+q)")
    assert e.chi == 9
    st = bc.twist(e, 0, {"y": -1})
    assert st.chi_after == st.chi_before - 3
    assert str(st.output) == "N_L(-1)(p+q-y)"
    assert bc.twist(e, 0).output.same_as(e)
    assert bc.evaluate_on_line(bc.twist(parse_expr("N_line"), 1).output) == S(2, 2, 2)


def test_combine_same_divisor_conic_free_example():
    e = parse_expr("N_line(-1)(6m1)[3m1->p1][3m1->p2][3m1->p3]; indep p1 p2 p3")
    st = bc.combine_same_divisor(e, Mod.make({"m1": 3}, "p1"), Mod.make({"m1": 3}, "p2"))
    st = bc.combine_same_divisor(st.output, Mod.make({"m1": 3}, ["p1", "p2"]),
                                 Mod.make({"m1": 3}, "p3"))
    assert str(st.output) == "N_L(-1)[3m1->p1+p2+p3]"
    assert st.output.chi == e.chi
    out = bc.saturate_full_space(st.output, Mod.make({"m1": 3}, ["p1", "p2", "p3"])).output
    assert str(out) == "N_L(-1)"


def test_combine_same_divisor_needs_independence():
    e = parse_expr("N_line[p->q1][p->q1]")
    with pytest.raises(bc.CalculusError):
        bc.combine_same_divisor(e, Mod.make("p", "q1"), Mod.make("p", "q1"))


def test_combine_same_target_and_split():
    e = parse_expr("N_line[q1->p][q2->p][q3->p]")
    st = bc.combine_same_target(e, Mod.make("q1", "p"), Mod.make("q2", "p"))
    st = bc.combine_same_target(st.output, Mod.make({"q1": 1, "q2": 1}, "p"),
                                Mod.make("q3", "p"))
    assert str(st.output) == "N_L[q1+q2+q3->p]"
    assert st.delta == 0
    back = bc.split_same_target(st.output, Mod.make({"q1": 1, "q2": 1, "q3": 1}, "p"),
                                {"q1": 1}).output
    assert str(back) == "N_L[q1->p][q2+q3->p]"


def test_saturate_rejects_small_target():
    e = parse_expr("N_line(-1)[m1->n1]")
    with pytest.raises(bc.MissingFact):
        bc.saturate_full_space(e, Mod.make("m1", "n1"))


def test_limit_points_is_flagged_and_identity_on_self():
    e = parse_expr("N_line(-1)[p->q]")
    st = bc.limit_points(e, {"p": "p"})
    assert st.output.same_as(e)
    assert bc.TRUSTED in st.flags


def test_non_tree_like_rejected():
    with pytest.raises(bc.NotTreeLike):
        parse_expr("N_line[p->q1][p->q2][p->q3]")
    # with general position the same datum is fine
    parse_expr("N_line[p->q1][p->q2][p->q3]; indep q1 q2 q3")


def test_evaluate_on_line_examples():
    assert bc.evaluate_on_line(parse_expr("N_line(-1)")) == S(0, 0, 0)
    assert bc.evaluate_on_line(parse_expr("N_line(-1)[p->q]")) == S(0, -1, -1)
    e = parse_expr("N_line(-1)(p+q-y)[p->a][q->b][x->c]; indep a b c")
    assert bc.evaluate_on_line(e) == S(-1, -1, -1)


def test_evaluate_on_line_order_independent():
    rng = random.Random(3)
    e = parse_expr("N_line(1)(p1-p2)[p1->a][2p2->a+b][p3->c]; indep a b c")
    want = bc.evaluate_on_line(e)
    for _ in range(6):
        order = list(range(len(e.mods)))
        rng.shuffle(order)
        assert bc.evaluate_on_line(bc.commute(e, order).output) == want


def test_evaluate_on_conic():
    assert bc.evaluate_on_conic(parse_expr("N_conic(-1)")) == S(2, 0, 0)
    n = parse_expr("N_conic")
    assert n.chi == 8 + 3 * 1 == bc.evaluate_on_conic(n).chi


def test_step_json_has_stable_fields():
    st = bc.twist(parse_expr("N_line"), -1)
    js = st.to_json()
    for k in ("rule", "anchor", "side_conditions", "chi_before", "chi_after"):
        assert k in js


def test_hh_restrict_adds_node_twist_and_direction():
    from bninterp.degeneration_leaves import parse_script
    text = """case t
pair 2 0
component A line
component B line
node x A B a' b'
start N_{A+B}(-1)
terminal axiom none
"""
    s = parse_script("t", text)
    e = parse_expr(s.start, s.geometry)
    sub = bc.hh_restrict(e, ["A"])
    assert str(sub) == "N_A(-1)(x)[x->b']"
    assert bc.evaluate_on_line(sub) == S(1, 0, 0)
    assert bc.hh_restrict(e, ["A", "B"]).same_as(e)


def test_chi_ledger_holds_for_random_twists():
    rng = random.Random(0)
    for _ in range(40):
        e = parse_expr("N_line(-1)[p->a][q->b]; indep a b")
        k = rng.randint(-3, 3)
        st = bc.twist(e, k, {"p": rng.randint(-2, 2)})
        assert st.output.chi - e.chi == st.delta


def test_parse_error_has_position():
    with pytest.raises(ExprSyntaxError) as ex:
        parse_expr("N_line(-1)[p->q")
    assert ex.value.pos == len("N_line(-1)[p->q")
