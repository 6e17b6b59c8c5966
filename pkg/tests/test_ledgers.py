from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistpoints.calculus.ledger import HalfOpen, interval_ledger
from twistpoints.errors import ParameterError
from twistpoints.index import case1_min_m, twist_gap_check, twist_gap_ledger
from twistpoints.index.primes import primes_below

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)
PRIMES = [int(p) for p in primes_below(3000)]


def test_interval_examples():
    L = interval_ledger(Fraction(1, 3), Fraction(1, 10), 7, Fraction(0))
    assert L.I == L.I_plus_C == L.I_plus_2C == L.common
    assert L.I.as_tuple() == (Fraction(21, 10), Fraction(77, 30))
    assert L.verdict
    spectrum = [Fraction(7, 3), Fraction(2), Fraction(3)]
    assert L.isolated(spectrum, Fraction(7, 3))
    assert not L.isolated(spectrum + [Fraction(12, 5)], Fraction(7, 3))


def test_interval_rejects_bad_input():
    with pytest.raises(ParameterError):
        interval_ledger(Fraction(1, 3), 0, 7, 0)
    with pytest.raises(ParameterError):
        interval_ledger(Fraction(1, 3), Fraction(1, 10), 7, -1)


@settings(max_examples=200, deadline=None)
@given(fractions, st.fractions(min_value=Fraction(1, 50), max_value=2, max_denominator=50),
       st.sampled_from(PRIMES[:300]), st.fractions(min_value=0, max_value=1, max_denominator=60))
def test_small_shift_implies_containment(a0, eps0, p, ratio):
    C = ratio * eps0 / 6 * p          # C / p < eps0 / 6 unless ratio == 1
    L = interval_ledger(a0, eps0, p, C)
    assert L.shift_small == (ratio < 1)
    if L.shift_small:
        assert L.union_inside and L.center_in_common
        # the center sits in every window
        for J in (L.I, L.I_plus_C, L.I_plus_2C):
            assert J.contains(p * a0)


def test_half_open_arithmetic():
    a = HalfOpen(Fraction(0), Fraction(1))
    assert a.contains(0) and not a.contains(1)
    assert a.intersect(a.shift(Fraction(1, 2))).as_tuple() == (Fraction(1, 2), 1)
    assert HalfOpen(2, 2).subset_of(a)


def test_case1_threshold():
    # 2m |i_z0 - i_inf| > 3n with |i_z0 - i_inf| = 3/2, n = 1: m = 2
    assert case1_min_m(Fraction(1, 2), Fraction(-1), 1) == 2
    assert case1_min_m(Fraction(1, 2), Fraction(-1), 2) == 3
    with pytest.raises(ParameterError):
        case1_min_m(Fraction(1), Fraction(1), 1)


def test_gap_check_is_exact():
    g = twist_gap_check(Fraction(1, 3), Fraction(1, 3), Fraction(-2, 3), 11, 17, 1)
    # |17/3 - 11/3 + 6 * 2/3| - 3 = 3
    assert g.margin == Fraction(3) and g.disjoint
    with pytest.raises(ParameterError):
        twist_gap_check(0, 0, 1, 17, 11, 1)


@settings(max_examples=60, deadline=None)
@given(fractions, fractions, st.lists(fractions, min_size=1, max_size=4), st.integers(1, 3),
       st.integers(0, 200))
def test_ledger_sufficient_conditions_are_sound(i_z0, i_inf, others, n, start):
    if i_z0 == i_inf:
        return
    m = case1_min_m(i_z0, i_inf, n)
    # odd primes only: m consecutive gaps then add up to at least 2m
    led = twist_gap_ledger(PRIMES[1 + start:start + 41], m, i_z0, i_inf, [i_z0] + others, n)
    assert led.sound
    assert all(r.disjoint for r in led.rows if r.case == 1)
    assert all(isinstance(r.margin, Fraction) for r in led.rows)
    for r in led.rows:
        if r.case == 2 and r.sufficient:
            assert r.disjoint


def test_case2_becomes_disjoint_for_large_primes():
    i_z0, i_inf, iz = Fraction(1, 2), Fraction(-1), Fraction(-7, 3)
    led = twist_gap_ledger(PRIMES, 2, i_z0, i_inf, [iz], 1)
    threshold = led.eventually_disjoint(0)
    assert threshold is not None and threshold < 100
    late = [r for r in led.rows if r.p_j > 100]
    assert all(r.sufficient for r in late)
