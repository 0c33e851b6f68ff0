import pytest

from bninterp.bn_arith import (TWISTED_EXCEPTIONS, UNTWISTED_EXCEPTIONS, BNPair,
                               NotBrillNoether, chi_normal, component_dimension,
                               d_min, f_points, rho, status)


@pytest.mark.parametrize("d,g,f", [(6, 2, 9), (8, 5, 12), (9, 6, 13), (10, 7, 14)])
def test_point_counts(d, g, f):
    assert f_points(BNPair(d, g)) == f


def test_chi_examples():
    assert chi_normal(BNPair(9, 5), -1) == 14
    assert chi_normal(BNPair(8, 5), 0, 7) == 15
    assert chi_normal(BNPair(9, 6), 0, 8) == 16
    assert chi_normal(BNPair(10, 7), 0, 9) == 17


def test_chi_with_modification_coranks():
    p = BNPair(14, 12)
    base = chi_normal(p, -1)
    assert chi_normal(p, -1, 0, 6) == base - 6


def test_rho_recurrences():
    for d in range(0, 50):
        for g in range(0, 50):
            assert rho(BNPair(d + 1, g)) == rho(BNPair(d, g)) + 5
            assert rho(BNPair(d, g + 1)) == rho(BNPair(d, g)) - 4


def test_dimension_equals_chi_and_f_bounds():
    for d in range(1, 51):
        for g in range(0, 51):
            p = BNPair(d, g)
            if not p.is_bn:
                continue
            dim = component_dimension(p)
            assert chi_normal(p) == dim
            assert 3 * f_points(p) <= dim < 3 * (f_points(p) + 1)


def test_twisted_implies_untwisted():
    for d in range(1, 51):
        for g in range(0, 51):
            p = BNPair(d, g)
            if p.is_bn:
                st = status(p)
                assert not st.twisted_good or st.untwisted_good


def test_status_examples():
    s = status(BNPair(6, 2))
    assert (s.twisted_good, s.untwisted_good, s.point_count) == (False, False, 9)
    assert status(BNPair(11, 8)).twisted_good
    s = status(BNPair(9, 6))
    assert (s.twisted_good, s.untwisted_good) == (False, True)
    assert s.constrained_answers["d_on_hyperplane"] is False
    assert s.constrained_answers["unconstrained_points"] == 13


def test_status_rejects_non_bn_unless_query():
    with pytest.raises(NotBrillNoether):
        status(BNPair(3, 5))
    q = status(BNPair(3, 5), query=True)
    assert q.is_bn is False and q.to_json()["brill_noether"] is False


def test_status_only_r4():
    with pytest.raises(ValueError):
        status(BNPair(3, 0, 3))


def test_exception_sets_and_dmin():
    assert TWISTED_EXCEPTIONS == {(6, 2), (8, 5), (9, 6), (10, 7)}
    assert UNTWISTED_EXCEPTIONS == {(6, 2)}
    assert [d_min(g) for g in range(6, 15)] == [10, 11, 11, 12, 12, 13, 14, 15, 16]
