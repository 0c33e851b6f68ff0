"""Acceptance criteria, one test each, with the pinned tolerances and time limits."""
import itertools
import random

from acceptance_log import criterion
from hh_util import line_text

from bninterp import bundle_calculus as bc
from bninterp import degeneration_leaves as dl
from bninterp import nodal_cohomology as nc
from bninterp.bn_arith import BNPair, chi_normal, f_points
from bninterp.exprparse import parse_expr
from bninterp.reduction import (TWISTED_LEAVES, UNTWISTED_LEAVES, sweep,
                                verify_table)


def test_criterion_1_arithmetic():
    with criterion(1, "point counts and Euler characteristics", limit=1.0) as st:
        assert [f_points(BNPair(*p)) for p in [(6, 2), (8, 5), (9, 6), (10, 7)]] == [9, 12, 13, 14]
        assert chi_normal(BNPair(9, 5), -1) == 14
        got = [chi_normal(BNPair(d, g), 0, d - 1) for d, g in [(8, 5), (9, 6), (10, 7)]]
        assert got == [15, 16, 17]
        st["detail"] = "f = 9/12/13/14, chi = 14 and 15/16/17"


def test_criterion_2_split_oracle():
    with criterion(2, "split-bundle oracle equivalence", limit=10.0) as st:
        n = 0
        for rank in range(1, 5):
            for degs in itertools.product(range(-3, 7), repeat=rank):
                s = bc.SplitBundle.of(degs)
                assert bc.interpolation_split(s) == bc.interpolation_oracle(s), degs
                n += 1
        st["detail"] = f"{n} splitting types agree"


def test_criterion_3_canonical_chains():
    with criterion(3, "canonical-curve chain replays") as st:
        want = {"12_10": ("split_interpolation", [0, 0, 0]),
                "13_10": ("split_h0_zero", [-1, -1, -2]),
                "13_11": ("split_interpolation", [0, -1, -1]),
                "14_12": ("split_h0_zero", [-1, -1, -2])}
        for case, (kind, split) in want.items():
            tr = dl.run_leaf(case)
            assert tr.verdict == "GOOD"
            for s in tr.steps:
                assert s["chi_after"] - s["chi_before"] == s["delta"], (case, s["rule"])
            assert (tr.terminal["kind"], tr.terminal["split"]["split"]) == (kind, split)
            if case == "13_10":
                line = [c for c in tr.checks if c["check"].startswith("restriction")]
                assert line[0]["split"] == [0, -1, -1]
            if case == "14_12":
                assert tr.terminal["split"]["h0"] == 0
        st["detail"] = "{0,0,0}, {0,-1,-1} (line step and final), {-1,-1,-2} with h0 = 0"


def test_criterion_4_witnesses():
    with criterion(4, "exact-cohomology witnesses", limit=60.0) as st:
        calls = [((4, 1, 3), 2, 0), ((5, 1, 4), 3, 0), ((6, 2, 4), 3, 0), ((4, 1, 3), 1, 1)]
        for (d, g, r), p100, p101 in calls:
            cert = nc.good(d, g, r, p100, p101, seed=0, seeds=2)
            assert isinstance(cert, nc.Certificate), (d, g, r, cert)
            js = cert.to_json()
            chi, rank = js["witness"]["chi"], js["witness"]["rank"]
            assert [x[1] for x in js["dims"]] == [max(0, chi - rank * j) for j, *_ in js["dims"]]
            assert js["witness"]["stable_seeds"] == [0, 1]
        st["detail"] = "4 certificates, seeds 0 and 1"


def test_criterion_5_line_consistency():
    with criterion(5, "line sections vs splitting types") as st:
        n = 0
        for seed in range(60):
            cfg, spec, desc = nc.line_instance(random.Random(seed))
            split = bc.evaluate_on_line(parse_expr(line_text(desc)))
            assert nc.section_dims(cfg, spec) == (split.h0, split.h1), line_text(desc)
            n += 1
        assert n >= 50
        st["detail"] = f"{n} random instances agree exactly"


def test_criterion_6_sweep():
    with criterion(6, "theorem-level sweep", limit=30.0) as st:
        allowed_rules = {"BASE_NONSPECIAL", "LEAF", "EXCEPTION"}
        allowed_cases = set(TWISTED_LEAVES.values()) | set(UNTWISTED_LEAVES.values())
        for mode, want in [("twisted", [[6, 2], [8, 5], [9, 6], [10, 7]]),
                           ("untwisted", [[6, 2]])]:
            rep = sweep(30, 20, mode)
            assert rep["exceptions"] == want
            assert rep["invalid_traces"] == {} and rep["unsettled"] == []
            for row in rep["matrix"]:
                assert set(row["leaf_rules"]) <= allowed_rules
                assert set(row["leaf_cases"]) <= allowed_cases
        st["detail"] = f"{rep['pairs']} pairs per mode, all traces revalidated"


def test_criterion_7_table():
    with criterion(7, "certificate-table audit") as st:
        rep = verify_table()
        assert rep["count"] == 27 and rep["failures"] == [] and rep["ok"]
        cell = next(c for c in rep["cells"] if (c["d"], c["g"]) == (15, 13))
        assert (cell["X"], cell["Y"], cell["s"]) == ([8, 5], [7, 3], 6)
        assert 8 + 7 == 15 and 3 + 3 * 6 - 8 == 13
        st["detail"] = "27 cells, 0 failures"


def test_criterion_8_sigma():
    with criterion(8, "local section identity on a secant line") as st:
        res = dl.sigma_identity()
        assert res["t0"] and res["t1"] and res["ok"]
        st["detail"] = f"sigma_0 = {res['sigma_0']}, sigma_1 = {res['sigma_1']}"
