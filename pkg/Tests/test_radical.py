# ************************************************************************
# *   Copyright (c) the AHAT toolkit developers 2024                     *
# *                                                                      *
# *   This library is free software; you can redistribute it and/or      *
# *   modify it under the terms of the GNU Library General Public        *
# *   License as published by the Free Software Foundation; either       *
# *   version 2 of the License, or (at your option) any later version.   *
# *                                                                      *
# *   This library  is distributed in the hope that it will be useful,   *
# *   but WITHOUT ANY WARRANTY; without even the implied warranty of     *
# *   MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the      *
# *   GNU Library General Public License for more details.               *
# *                                                                      *
# *   You should have received a copy of the GNU Library General Public  *
# *   License along with this library; see the file COPYING.LIB. If not, *
# *   write to the Free Software Foundation, Inc., 59 Temple Place,      *
# *   Suite 330, Boston, MA  02111-1307, USA                             *
# ************************************************************************

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from Arithmetic.Radical import RadicalSum, Sign, canonicalize, sqrt_rational, sign, compare, squarefreeSplit
from Utils.Errorhandling import DomainError, isAhatError, Nested_Radical, Zero_Divisor

rationals  = st.fractions(min_value=-20, max_value=20, max_denominator=12)
radicands  = st.integers(min_value=1, max_value=60)
radicals   = st.lists(st.tuples(radicands, rationals), max_size=4).map(canonicalize)


def numeric(x: RadicalSum):
    with mpmath.workprec(256):
        return sum((mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(r) for r, c in x.terms), mpmath.mpf(0))


def test_canonical_form_merges_radicands():

    x = canonicalize([(8, 1), (2, 1), (9, Fraction(1, 3))])
    assert x.terms == ((1, Fraction(1)), (2, Fraction(3)))
    assert str(x) == "1 + 3*sqrt(2)"


def test_squarefree_split():
    assert squarefreeSplit(72) == (6, 2)
    assert squarefreeSplit(1) == (1, 1)
    assert squarefreeSplit(30) == (1, 30)


def test_sqrt_of_rational():

    assert sqrt_rational(Fraction(9, 4)) == RadicalSum(Fraction(3, 2))
    assert sqrt_rational(Fraction(1, 2)) == canonicalize([(2, Fraction(1, 2))])
    with pytest.raises(DomainError):
        sqrt_rational(-1)


def test_nested_radical_is_a_domain_error():

    with pytest.raises(DomainError) as info:
        sqrt_rational(canonicalize([(1, 1), (2, 1)]))
    assert isAhatError(info.value, reason=Nested_Radical)


def test_division_by_zero():

    with pytest.raises(DomainError) as info:
        RadicalSum(1) / RadicalSum(0)
    assert isAhatError(info.value, source="radical", reason=Zero_Divisor)


def test_sign_of_close_values():
    # √2 + √3 against √10 differ by about 0.0165
    x = canonicalize([(2, 1), (3, 1), (10, -1)])
    assert sign(x) == Sign.negative
    assert compare(canonicalize([(10, 1)]), canonicalize([(2, 1), (3, 1)])) == 1


def test_sign_after_deep_cancellation():
    # (√2 + √3 − √10)^k shrinks below 2^-64 long before its coefficients stop growing
    gap = canonicalize([(2, 1), (3, 1), (10, -1)])
    power = RadicalSum(1)
    for _ in range(20):
        power = power * gap
    assert numeric(power) < mpmath.mpf(2) ** -64
    assert sign(power) == Sign.positive
    assert sign(power * gap) == Sign.negative
    assert compare(power * gap, RadicalSum(0)) == -1


def test_parse_reads_rendering():
    x = canonicalize([(1, Fraction(-1, 2)), (5, Fraction(2, 3)), (7, -1)])
    assert RadicalSum.parse(str(x)) == x


@given(radicals, radicals)
def test_addition_and_multiplication_commute(x, y):
    assert x + y == y + x
    assert x * y == y * x


@given(radicals, radicals, radicals)
@settings(max_examples=50)
def test_associativity(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)


@given(st.lists(st.tuples(radicands, rationals), max_size=6), st.data())
def test_canonical_form_ignores_term_order(raw, data):
    shuffled = data.draw(st.permutations(raw))
    assert canonicalize(shuffled) == canonicalize(raw)
    assert canonicalize(shuffled).terms == canonicalize(raw).terms


@given(radicals, radicals, radicals)
@settings(max_examples=50)
def test_distributivity(x, y, z):
    assert x * (y + z) == x * y + x * z


@given(radicals)
def test_negation_cancels(x):
    assert (x - x).isZero()
    assert (x + (-x)).sign() == Sign.zero


@given(radicals)
def test_sign_agrees_with_high_precision(x):
    expected = numeric(x)
    if x.isZero():
        assert sign(x) == Sign.zero
    else:
        assert sign(x) == (Sign.positive if expected > 0 else Sign.negative)


@given(radicals)
def test_bounds_enclose_value(x):
    lo, hi = x.bounds(64)
    value = numeric(x)
    assert mpmath.mpf(lo.numerator) / lo.denominator <= value <= mpmath.mpf(hi.numerator) / hi.denominator


@given(radicals, radicals)
def test_equality_is_canonical(x, y):
    assert (x == y) == (sign(x - y) == Sign.zero)


@pytest.mark.slow
@settings(max_examples=10000, deadline=None)
@given(radicals)
def test_sign_agrees_with_high_precision_sweep(x):
    expected = numeric(x)
    if x.isZero():
        assert sign(x) == Sign.zero
    else:
        assert sign(x) == (Sign.positive if expected > 0 else Sign.negative)
