from decimal import Decimal
from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import (brute_min_scaled, golden_gaps, golden_nearest, liouville_decimal, liouville_gap,
                     liouville_partial)
from sglab.diophantine import (GOLDEN, INV_E_LOW, LN10_HIGH, LN10_LOW, LOG10_2_HIGH, LOG10_E_HIGH, MAX_DEPTH,
                               ModelSequence, check_condition_A, check_condition_B, certified_convergents,
                               construct_failing_subsequence, continued_fraction, convergents, exact_gap,
                               gap_below, liouville_number, liouville_witness, nearest_integer_gap,
                               one_minus_exp_bound, small_divisor_values, small_divisors)
from sglab.errors import ParameterError, RangeError, SizeGuardError

LIN = ModelSequence.power()


def test_rational_bounds_are_on_the_right_side():
    e = Decimal(1).exp()
    assert Decimal(INV_E_LOW.numerator) / INV_E_LOW.denominator < 1 / e
    assert Decimal(LOG10_E_HIGH.numerator) / LOG10_E_HIGH.denominator > e.log10()
    assert Decimal(LOG10_2_HIGH.numerator) / LOG10_2_HIGH.denominator > Decimal(2).log10()
    ln10 = Decimal(10).ln()
    assert Decimal(LN10_LOW.numerator) / LN10_LOW.denominator < ln10 < Decimal(LN10_HIGH.numerator) / LN10_HIGH.denominator


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_nearest_integer_gap_exact(p, q):
    x = Fraction(p, q)
    tau, gap = nearest_integer_gap(x)
    assert gap == abs(x - tau) and gap <= Fraction(1, 2)
    assert all(abs(x - t) >= gap for t in (tau - 1, tau + 1))
    if gap == Fraction(1, 2):
        assert tau % 2 == 0


@given(st.floats(-1e6, 1e6))
def test_nearest_integer_gap_float(x):
    tau, gap = nearest_integer_gap(x)
    assert gap <= 0.5 and abs(x - tau) == gap


def test_golden_gaps_match_integer_oracle():
    seq_gaps = golden_gaps(1, 2000)
    for j in (1, 2, 3, 55, 89, 1597, 2000):
        tau, gap = nearest_integer_gap(GOLDEN * j)
        assert tau == golden_nearest(j)
        assert gap == pytest.approx(float(seq_gaps[j - 1]), rel=1e-9)


@pytest.fixture(scope="module")
def golden_b():
    return check_condition_B(GOLDEN, LIN, 100_000, (0.5, 1.0), j_min=10)


def test_golden_constant_against_brute_force(golden_b):
    oracle = brute_min_scaled(golden_gaps(10, 100_000), 10, 1)
    assert golden_b.constant(1.0) == pytest.approx(float(oracle), rel=1e-8)
    assert golden_b.constant(1.0) >= 0.44
    # the classical liminf 1/sqrt 5 of j * dist(j phi, Z)
    assert golden_b.constant(1.0) == pytest.approx(1 / 5**0.5, abs=5e-4)
    assert golden_b.verdict == "holds-on-range" and not golden_b.resonant


def test_golden_full_range_is_set_by_j_equal_one():
    rep = check_condition_B(GOLDEN, LIN, 1000, (1.0,))
    assert rep.constant(1.0) == pytest.approx(GOLDEN - 1 - 0.236068, abs=1e-6)
    assert rep.witnesses[0].j == 1


@pytest.mark.parametrize("alpha", [Fraction(1, 2), 0.5])
def test_rational_half(alpha):
    a = check_condition_A(alpha, LIN, 1000, (0.0, 1.0), j_min=1)
    b = check_condition_B(alpha, LIN, 1000, (0.0, 1.0), j_min=1)
    assert a.verdict == "resonance-dominated" and len(a.resonant) == 500
    assert b.verdict == "holds-on-range" and b.constant(0.0) == 0.5
    assert a.arithmetic == ("exact" if isinstance(alpha, Fraction) else "float")


def test_integer_alpha_next_nearest_gap():
    b = check_condition_B(1, LIN, 100, (0.0,), j_min=1)
    assert b.constant(0.0) == 1.0 and len(b.resonant) == 100


@given(st.integers(1, 50), st.integers(1, 50), st.integers(10, 400), st.integers(1, 9))
def test_rational_resonance_count(p, q, j_max, j_min):
    a = Fraction(p, q)
    rep = check_condition_A(a, LIN, j_max, (1.0,), j_min=j_min)
    d = a.denominator
    assert len(rep.resonant) == j_max // d - (j_min - 1) // d
    assert all(Fraction(p, q) * j == t for j, t in rep.resonant)


@given(st.floats(0.01, 10.0), st.lists(st.floats(0.0, 2.0), min_size=2, max_size=4, unique=True))
def test_constants_nondecreasing_in_epsilon(alpha, eps):
    eps = sorted(eps)
    rep = check_condition_B(alpha, LIN, 500, eps, j_min=1)
    assert all(x <= y * (1 + 1e-12) for x, y in zip(rep.constants, rep.constants[1:]))


def test_scan_preconditions():
    with pytest.raises(ParameterError):
        check_condition_A(GOLDEN, LIN, 5, (1.0,))
    with pytest.raises(ParameterError):
        check_condition_A(GOLDEN, LIN, 100, (-1.0,))
    with pytest.raises(ParameterError):
        check_condition_A(GOLDEN, LIN, 100, (1.0,), j_min=200)
    with pytest.raises(ParameterError):
        check_condition_A(liouville_number(2), ModelSequence.power(1, 1.5), 100, (1.0,))


def test_measured_sequence_is_indicative():
    seq = ModelSequence("measured", measured=np.arange(1.0, 51.0) ** 2)
    rep = check_condition_B(GOLDEN, seq, 50, (1.0,))
    assert rep.indicative and rep.label.endswith("(indicative)")
    with pytest.raises(RangeError):
        seq.values(1, 60)


def test_sequence_validation():
    with pytest.raises(ParameterError):
        ModelSequence("cubic")
    with pytest.raises(ParameterError):
        ModelSequence.power(a=0)
    with pytest.raises(ParameterError):
        ModelSequence("measured", measured=np.array([1.0, -1.0]))
    assert list(ModelSequence.power(Fraction(1, 2), 2).exact_values(1, 3)) == [Fraction(1, 2), 2, Fraction(9, 2)]
    assert ModelSequence.logpower(1, 1).values(2, 2)[0] == pytest.approx(2 / np.log(3))


# ---------------------------------------------------------------- Liouville

def test_liouville_interval_contains_the_constant():
    x = liouville_decimal()
    for n in range(1, MAX_DEPTH + 1):
        lo, hi = liouville_number(n).interval()
        assert Decimal(lo.numerator) / lo.denominator < x < Decimal(hi.numerator) / hi.denominator
        assert liouville_number(n).value == liouville_partial(n)
    with pytest.raises(SizeGuardError):
        liouville_number(MAX_DEPTH + 1)


@pytest.mark.parametrize("j", [1, 7, 999, 10**6, 123456789, 10**24])
def test_liouville_exact_gap_brackets_decimal_oracle(j):
    tau, (low, high) = exact_gap(liouville_number(3), LIN, j)
    t, g = liouville_gap(j)
    assert tau == t
    assert Decimal(low.numerator) / low.denominator <= g <= Decimal(high.numerator) / high.denominator


@pytest.fixture(scope="module")
def liouville_b():
    return check_condition_B(liouville_number(3), LIN, 1_000_000, (0.25, 0.5))


def test_liouville_scan_fails_with_certified_witness(liouville_b):
    rep = liouville_b
    assert rep.verdict == "fails-with-witnesses" and rep.arithmetic == "interval"
    w = rep.witnesses[-1]
    assert (w.j, w.tau) == (10**6, 110001) and w.certified
    t, g = liouville_gap(w.j)
    assert Decimal(w.exact.numerator) / w.exact.denominator >= g


@pytest.fixture(scope="module")
def subsequence():
    return construct_failing_subsequence(liouville_number(3), 3)


def test_failing_subsequence_values(subsequence):
    e = subsequence.entries
    assert [x.j for x in e] == [1, 10**6, 10**24]
    assert [x.tau for x in e] == [0, 110001, 110001000000000000000001]
    assert float(e[0].C) == pytest.approx(np.exp(-1), rel=1e-15)
    assert subsequence.verify()


def test_failing_subsequence_against_decimal_oracle(subsequence):
    for e in subsequence.entries:
        tau, gap = liouville_gap(e.j)
        assert tau == e.tau
        assert 0 < gap < Decimal(e.C.numerator) / e.C.denominator / Decimal(e.j) ** e.k
        assert Decimal(e.gap_low.numerator) / e.gap_low.denominator <= gap
        assert gap <= Decimal(e.gap_high.numerator) / e.gap_high.denominator
        # the schedule requirement: gap_k < j_k^{-k}, checked on exact rationals
        assert e.gap_high < Fraction(1, e.j**e.k)


def test_failing_subsequence_limits():
    with pytest.raises(SizeGuardError):
        construct_failing_subsequence(liouville_number(3), 4)
    with pytest.raises(SizeGuardError):
        construct_failing_subsequence(liouville_number(3), MAX_DEPTH + 1)
    with pytest.raises(ParameterError):
        construct_failing_subsequence(GOLDEN, 2)
    rational = construct_failing_subsequence(Fraction(3, 7), 2)
    assert rational.status == "resonance-dominated" and rational.resonant_denominator == 7 and not rational.entries


def test_continued_fractions():
    assert continued_fraction(Fraction(415, 93)) == [4, 2, 6, 7]
    fib = convergents([1] * 10)
    assert fib[-1] == (89, 55)
    x = liouville_decimal()
    lo, hi = liouville_number(MAX_DEPTH).interval()
    for p, q in certified_convergents(lo, hi):
        assert abs(x - Decimal(p) / q) < Decimal(1) / (q * q)


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_symbolic_witness_dual_route(level):
    w = liouville_witness(level)
    j = 10**w.log10_j
    tau, gap = liouville_gap(j)
    assert w.tau == tau
    assert w.log10_gap_low < gap.log10() < w.log10_gap_high
    # second route: exact interval arithmetic at the maximum depth
    t, (low, high) = exact_gap(liouville_number(MAX_DEPTH), LIN, j)
    assert t == tau
    low, high = (Decimal(x.numerator) / x.denominator for x in (low, high))
    # the interval endpoint may touch the open symbolic bound (level 4 at depth 4)
    assert w.log10_gap_low <= low.log10() and high.log10() <= w.log10_gap_high


@pytest.mark.parametrize("level, power, e_power", [(2, 1, 1), (3, 2, 2), (3, 3, 3), (4, 4, 4), (2, 3, 0)])
def test_gap_below_matches_decimal(level, power, e_power):
    w = liouville_witness(level)
    j = Decimal(10) ** w.log10_j
    _, gap = liouville_gap(int(j))
    truth = gap < j ** -power * Decimal(-e_power).exp()
    assert gap_below(w, power, e_power) == truth


def test_large_level_witness_is_symbolic():
    w = liouville_witness(9)
    assert w.tau is None and w.log10_j == factorial(9)
    with pytest.raises(ParameterError):
        liouville_witness(0)


# ---------------------------------------------------------------- small divisors

@given(st.floats(-10, 10))
def test_one_minus_exp_bound(beta):
    lower, actual, shift = one_minus_exp_bound(beta)
    assert actual >= lower
    assert abs(beta + shift) <= 0.5


def test_one_minus_exp_bound_equality_at_half():
    lower, actual, _ = one_minus_exp_bound(0.5)
    assert lower == actual == 2.0


def test_small_divisors_closed_form():
    theta, gamma, ti, gi = small_divisor_values(-1j, np.array([1.0, 2.0]))
    assert theta[0] == pytest.approx(1 / (1 - np.exp(-2 * np.pi)), rel=1e-14)
    assert theta[0] == pytest.approx(1.00187094, abs=1e-8)
    assert gamma[0] == pytest.approx(1 / (np.exp(2 * np.pi) - 1), rel=1e-12)
    assert not ti.any() and not gi.any()


@given(st.floats(-2, 2), st.floats(-0.05, 0.05), st.floats(0.5, 30))
def test_small_divisors_against_direct_formula(re, im, lam):
    omega = complex(re, im)
    theta, gamma, ti, gi = small_divisor_values(omega, np.array([lam]))
    direct_t = abs(1 - np.exp(-2j * np.pi * lam * omega))
    direct_g = abs(np.exp(2j * np.pi * lam * omega) - 1)
    if direct_t > 1e-6:
        assert theta[0] == pytest.approx(1 / direct_t, rel=1e-8)
    if direct_g > 1e-6:
        assert gamma[0] == pytest.approx(1 / direct_g, rel=1e-8)


def test_small_divisors_large_imaginary_part_stays_finite():
    theta, gamma, ti, gi = small_divisor_values(-1j, np.array([500.0]))
    assert theta[0] == 1.0 and gamma[0] == 0.0 and np.isfinite(theta).all()


def test_small_divisor_table_flags_resonances():
    table = small_divisors(0.5, LIN, 10)
    assert list(table.theta_infinite) == [j % 2 == 0 for j in range(1, 11)]
    assert np.isinf(table.theta[1]) and np.isfinite(table.theta[0])
    with pytest.raises(ParameterError):
        small_divisors(0.5, LIN, 0)
