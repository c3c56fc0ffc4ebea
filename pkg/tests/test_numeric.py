from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from auctionclear.numeric import (EXACT, FLOATING, Arithmetic, Ordering, TolerancePolicy, compare)


def test_compare_examples():
    third = Fraction(1, 3)
    assert compare(third + third + third, Fraction(1), 0) == Ordering.EQUAL
    assert compare(0.1 + 0.2, 0.3, 1e-9) == Ordering.EQUAL
    assert compare(4, 3, 0) == Ordering.GREATER
    assert compare(Fraction(1, 2), Fraction(2, 3)) == Ordering.LESS


def test_float_compare_without_tolerance_is_strict():
    assert compare(0.1 + 0.2, 0.3, 0) != Ordering.EQUAL


def test_rational_mode_forces_zero_tolerances():
    a = Arithmetic("rational", TolerancePolicy(1e-3, 1e-3, 1e-3))
    assert a.tol.feasibility_eps == 0
    assert a.tol.integrality_eps == 0
    assert a.tol.complementarity_eps == 0


def test_float_defaults():
    assert FLOATING.tol == TolerancePolicy(1e-9, 1e-6, 1e-8)


def test_negative_tolerance_rejected():
    with pytest.raises(ValueError):
        TolerancePolicy(-1.0)


def test_scalar_parsing():
    assert EXACT.scalar("7/2") == Fraction(7, 2)
    assert EXACT.scalar(Decimal("0.1")) == Fraction(1, 10)
    assert EXACT.scalar(0.1) == Fraction(1, 10)
    assert FLOATING.scalar("7/2") == 3.5
    with pytest.raises(ValueError):
        FLOATING.scalar(float("nan"))
    with pytest.raises(TypeError):
        EXACT.scalar(True)


def test_fmt():
    assert EXACT.fmt(Fraction(43, 4)) == "43/4"
    assert EXACT.fmt(Fraction(6)) == "6"
    assert FLOATING.fmt(10.75) == 10.75
    assert EXACT.fmt(None) is None


def test_integrality():
    assert EXACT.is_integral(Fraction(4))
    assert not EXACT.is_integral(Fraction(1, 2))
    assert FLOATING.is_integral(1.0000001)
    assert not FLOATING.is_integral(1.01)


small = st.fractions(min_value=-100, max_value=100, max_denominator=50)


@given(small, small)
def test_rational_add_sub_exact(a, b):
    assert (a + b) - b == a
    assert compare((a + b) - b, a, 0) == Ordering.EQUAL


@given(small)
def test_fraction_lowest_terms(a):
    x = EXACT.scalar(a)
    assert x.denominator > 0
    from math import gcd
    assert gcd(x.numerator, x.denominator) == 1
