import json
import random

import pytest

from bninterp import bundle_calculus as bc
from bninterp import nodal_cohomology as nc
from bninterp.exprparse import parse_expr

from hh_util import line_text


def test_line_twisted_is_trivial():
    p, q = nc.sample_general(1, 2, 4)
    line = nc._line_through("L", p, q)
    cfg = nc.CurveConfig((line,))
    assert nc.section_dims(cfg, nc.BundleSpec(-1)) == (3, 0)


def test_rational_normal_quartic():
    cfg = nc.CurveConfig((nc.rational_normal_curve("R", 4),))
    assert nc.section_dims(cfg, nc.BundleSpec(0)) == (21, 0)


def test_cubic_plus_secant_witness():
    cfg = nc.witness_config(4, 1, 3, random.Random(0), nc.DEFAULT_BOX)
    assert nc.section_dims(cfg, nc.BundleSpec(0)) == (16, 0)


def test_chi_consistency_with_calculus():
    for seed in range(10):
        cfg, spec, desc = nc.line_instance(random.Random(seed))
        h0, h1 = nc.section_dims(cfg, spec)
        assert h0 - h1 == parse_expr(line_text(desc)).chi == nc.spec_chi(cfg, spec)


def test_line_sections_match_splitting_types():
    checked = 0
    for seed in range(60):
        cfg, spec, desc = nc.line_instance(random.Random(1000 + seed))
        split = bc.evaluate_on_line(parse_expr(line_text(desc)))
        assert nc.section_dims(cfg, spec) == (split.h0, split.h1), line_text(desc)
        checked += 1
    assert checked >= 50


def test_check_interpolation_negative_bundle():
    p, q = nc.sample_general(2, 2, 4)
    cfg = nc.CurveConfig((nc._line_through("L", p, q),))
    cert = nc.check_interpolation(cfg, nc.BundleSpec(-1), seed=0)
    assert isinstance(cert, nc.Certificate)
    assert cert.dims[-1][1] == 0


def test_check_interpolation_rejects_negative_chi():
    p, q = nc.sample_general(2, 2, 4)
    cfg = nc.CurveConfig((nc._line_through("L", p, q),))
    with pytest.raises(nc.WitnessError):
        nc.check_interpolation(cfg, nc.BundleSpec(-3))


def test_good_is_deterministic_and_recomputable():
    a = nc.good(4, 1, 3, p100=2, seed=3)
    b = nc.good(4, 1, 3, p100=2, seed=3)
    assert isinstance(a, nc.Certificate)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
    js = a.to_json()
    assert nc.recompute(js) == js["dims"]
    assert nc.SEMICONTINUITY in js["caveats"] and nc.BN_MEMBERSHIP in js["caveats"]
    rank = js["witness"]["rank"]
    h0s = [d[1] for d in js["dims"]]
    for x, y in zip(h0s, h0s[1:]):
        assert x - y == min(rank, x)


def test_unsupported_witness():
    with pytest.raises(nc.WitnessError):
        nc.good(7, 3, 4)


def test_sample_general_constraints():
    (p,) = nc.sample_general(5, 1, 4, ("hyperplane", [1, 2, 3, 4, 5]))
    assert sum(c * x for c, x in zip([1, 2, 3, 4, 5], p)) == 0
    line = nc._line_through("L", *nc.sample_general(6, 2, 4))
    (x,) = nc.sample_general(7, 1, 4, ("on", line))
    assert len(x) == 5
    with pytest.raises(nc.WitnessError):
        nc.sample_general(1, 1, 4, ("hyperplane", [0, 0, 0, 0, 0]))
