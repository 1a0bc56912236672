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

import math, re
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from Utils.Errorhandling import AhatError, DomainError, Nested_Radical, Zero_Divisor

StartBits = 64
MaxBits   = 1 << 14


class Sign(Enum):
    negative = -1
    zero     = 0
    positive = 1


@lru_cache(maxsize=1 << 16)
def squarefreeSplit(n: int):
    # returns (s, r) with n = s²·r and r squarefree, by trial division

    if n <= 0:
        raise DomainError("radical", "nonpositive_radicand", f"radicand {n} must be positive")

    square, free, rest = 1, 1, n
    divisor = 2
    while divisor * divisor <= rest:
        count = 0
        while rest % divisor == 0:
            rest //= divisor
            count += 1
        square *= divisor ** (count // 2)
        if count % 2:
            free *= divisor
        divisor += 1 if divisor == 2 else 2

    return square, free * rest


def _rational(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as exact rational")


class RadicalSum():
    ''' Exact real number of the form q₀ + Σ qᵢ·√rᵢ

        Terms are kept canonical: every radicand is squarefree and positive, radicand 1 holds the
        rational part and no coefficient is zero. Two values are equal iff their term tuples are
        identical, which is what makes attention ties decidable by plain comparison.
    '''

    __slots__ = ("_terms", "_hash")

    def __init__(self, value=0):
        # value - int or Fraction for a rational number
        value = _rational(value)
        self._terms = ((1, value),) if value else ()
        self._hash  = None

    @classmethod
    def _fromDict(cls, terms: dict):
        obj = cls.__new__(cls)
        obj._terms = tuple(sorted((r, c) for r, c in terms.items() if c))
        obj._hash  = None
        return obj

    @classmethod
    def canonicalize(cls, raw):
        # raw - iterable of (radicand, coefficient)
        terms = {}
        for radicand, coefficient in raw:
            coefficient = _rational(coefficient)
            square, free = squarefreeSplit(int(radicand))
            terms[free] = terms.get(free, Fraction(0)) + coefficient * square

        return cls._fromDict(terms)

    @classmethod
    def sqrtRational(cls, q):

        q = _rational(q)
        if q < 0:
            raise DomainError("radical", "negative_sqrt", f"square root of negative rational {q}")
        if q == 0:
            return cls()

        #√(a/b) = √(a·b)/b
        return cls.canonicalize([(q.numerator * q.denominator, Fraction(1, q.denominator))])

    @staticmethod
    def coerce(value):
        if isinstance(value, RadicalSum):
            return value
        return RadicalSum(value)

    # ----------------------------------------------------------------------------------------------
    # inspection

    @property
    def terms(self):
        return self._terms

    def isZero(self):
        return not self._terms

    def isRational(self):
        return not self._terms or (len(self._terms) == 1 and self._terms[0][0] == 1)

    def rational(self):
        if not self._terms:
            return Fraction(0)
        if self.isRational():
            return self._terms[0][1]
        raise DomainError("radical", "not_rational", f"{self} is not rational")

    def sqrt(self):
        if not self.isRational():
            raise DomainError("radical", Nested_Radical, f"nested radical outside exact domain: sqrt({self})")
        return RadicalSum.sqrtRational(self.rational())

    def ratio(self, other):
        # returns the rational q with self = q·other, if such a q exists

        other = RadicalSum.coerce(other)
        if other.isZero():
            raise DomainError("radical", Zero_Divisor, "ratio against zero")
        if self.isZero():
            return Fraction(0)

        if len(self._terms) != len(other._terms):
            raise DomainError("radical", "not_proportional", f"{self} is no rational multiple of {other}")

        q = None
        for (r1, c1), (r2, c2) in zip(self._terms, other._terms):
            if r1 != r2 or (q is not None and c1 / c2 != q):
                raise DomainError("radical", "not_proportional", f"{self} is no rational multiple of {other}")
            q = c1 / c2

        return q

    # ----------------------------------------------------------------------------------------------
    # arithmetic

    def __add__(self, other):
        if not isinstance(other, (RadicalSum, int, Rational)):
            return NotImplemented

        other = RadicalSum.coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other

        terms = dict(self._terms)
        for r, c in other._terms:
            terms[r] = terms.get(r, 0) + c
        return RadicalSum._fromDict(terms)

    __radd__ = __add__

    def __neg__(self):
        obj = RadicalSum.__new__(RadicalSum)
        obj._terms = tuple((r, -c) for r, c in self._terms)
        obj._hash  = None
        return obj

    def __sub__(self, other):
        if not isinstance(other, (RadicalSum, int, Rational)):
            return NotImplemented
        return self + (-RadicalSum.coerce(other))

    def __rsub__(self, other):
        return RadicalSum.coerce(other) - self

    def scale(self, q):
        q = _rational(q)
        if not q or not self._terms:
            return RadicalSum()
        obj = RadicalSum.__new__(RadicalSum)
        obj._terms = tuple((r, c * q) for r, c in self._terms)
        obj._hash  = None
        return obj

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(other)
        if not isinstance(other, RadicalSum):
            return NotImplemented

        if other.isRational():
            return self.scale(other.rational())
        if self.isRational():
            return other.scale(self.rational())

        terms = {}
        for r1, c1 in self._terms:
            for r2, c2 in other._terms:
                #r1, r2 squarefree: √r1·√r2 = g·√(r1/g · r2/g), the latter squarefree again
                g = math.gcd(r1, r2)
                radicand = (r1 // g) * (r2 // g)
                terms[radicand] = terms.get(radicand, 0) + c1 * c2 * g

        return RadicalSum._fromDict(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            if other == 0:
                raise DomainError("radical", Zero_Divisor, f"division of {self} by zero")
            return self.scale(1 / _rational(other))
        if not isinstance(other, RadicalSum):
            return NotImplemented

        if other.isZero():
            raise DomainError("radical", Zero_Divisor, f"division of {self} by zero")
        if len(other._terms) != 1:
            raise DomainError("radical", "general_divisor", f"division by {other} is outside the exact domain")

        #x / (c·√r) = x·√r / (c·r)
        r, c = other._terms[0]
        return (self * RadicalSum._fromDict({r: Fraction(1)})).scale(1 / (c * r))

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = RadicalSum(1)
        for _ in range(exponent):
            result = result * self
        return result

    # ----------------------------------------------------------------------------------------------
    # comparison

    def sign(self):
        return _sign(self._terms)

    def __eq__(self, other):
        if isinstance(other, RadicalSum):
            return self._terms == other._terms
        if isinstance(other, (int, Rational)):
            return self.isRational() and self.rational() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rational()) if self.isRational() else hash(self._terms)
        return self._hash

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __bool__(self):
        return bool(self._terms)

    # ----------------------------------------------------------------------------------------------
    # approximation

    def interval(self, bits: int):
        # integers (lo, hi) with lo ≤ self·2^bits ≤ hi

        if not self._terms:
            return 0, 0

        denominator = 1
        for _, c in self._terms:
            denominator = denominator * c.denominator // math.gcd(denominator, c.denominator)

        lo = hi = 0
        for r, c in self._terms:
            a = c.numerator * (denominator // c.denominator)
            if r == 1:
                lo += a << bits
                hi += a << bits
                continue
            root = _isqrtScaled(r, bits)
            if a > 0:
                lo += a * root
                hi += a * (root + 1)
            else:
                lo += a * (root + 1)
                hi += a * root

        return lo // denominator, -((-hi) // denominator)

    def bounds(self, bits: int=StartBits):
        lo, hi = self.interval(bits)
        return Fraction(lo, 1 << bits), Fraction(hi, 1 << bits)

    def approx(self, prec: int=128):
        # high precision approximation for rendering and cross checks

        import mpmath
        with mpmath.workprec(prec):
            value = mpmath.mpf(0)
            for r, c in self._terms:
                value += mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(r)
            return +value

    # ----------------------------------------------------------------------------------------------
    # text

    def __str__(self):

        if not self._terms:
            return "0"

        parts = []
        for r, c in self._terms:
            magnitude = abs(c)
            if r == 1:
                text = str(magnitude)
            elif magnitude == 1:
                text = f"sqrt({r})"
            else:
                text = f"{magnitude}*sqrt({r})"

            if not parts:
                parts.append(text if c > 0 else "-" + text)
            else:
                parts.append((" + " if c > 0 else " - ") + text)

        return "".join(parts)

    def __repr__(self):
        return f"RadicalSum('{self}')"

    @classmethod
    def parse(cls, text: str):

        compact = text.replace(" ", "")
        if compact in ("", "0", "-0", "+0"):
            if compact == "":
                raise DomainError("radical", "empty_text", "empty radical expression")
            return cls()

        raw = []
        for chunk in re.findall(r"[+-]?[^+-]+", compact):
            negative = chunk.startswith("-")
            body = chunk.lstrip("+-")
            match = _TermPattern.fullmatch(body)
            if not match or not (match.group(1) or match.group(3)):
                raise DomainError("radical", "malformed_text", f"cannot read radical term '{chunk}'")

            coefficient = Fraction(int(match.group(1)), int(match.group(2) or 1)) if match.group(1) else Fraction(1)
            radicand = int(match.group(3)) if match.group(3) else 1
            raw.append((radicand, -coefficient if negative else coefficient))

        if "".join(re.findall(r"[+-]?[^+-]+", compact)) != compact:
            raise DomainError("radical", "malformed_text", f"cannot read radical expression '{text}'")

        return cls.canonicalize(raw)


_TermPattern = re.compile(r"(?:(\d+)(?:/(\d+))?)?(?:\*?sqrt\((\d+)\))?")

ZERO = RadicalSum(0)
ONE  = RadicalSum(1)


@lru_cache(maxsize=1 << 14)
def _isqrtScaled(r: int, bits: int):
    return math.isqrt(r << (2 * bits))


@lru_cache(maxsize=1 << 16)
def _sign(terms):

    if not terms:
        return Sign.zero

    if len(terms) == 1:
        return Sign.positive if terms[0][1] > 0 else Sign.negative

    if len(terms) == 2:
        #a·√r1 + b·√r2 with opposite signs: compare the squares
        (r1, a), (r2, b) = terms
        if (a > 0) == (b > 0):
            return Sign.positive if a > 0 else Sign.negative
        first, second = a * a * r1, b * b * r2
        if first == second:
            raise AhatError("radical", "noncanonical", f"noncanonical terms {terms}")
        dominant = a if first > second else b
        return Sign.positive if dominant > 0 else Sign.negative

    value = RadicalSum._fromDict(dict(terms))
    bits = StartBits
    lo, hi = value.interval(bits)
    while lo <= 0 <= hi and bits < MaxBits:
        bits *= 2
        lo, hi = value.interval(bits)

    #square roots of distinct squarefree integers are linearly independent, a canonical sum is never 0
    assert lo > 0 or hi < 0, f"sign of {value} unresolved at {bits} bits"
    return Sign.positive if lo > 0 else Sign.negative


# --------------------------------------------------------------------------------------------------
# operation level interface

def canonicalize(raw):
    return RadicalSum.canonicalize(raw)

def add(a, b):
    return RadicalSum.coerce(a) + RadicalSum.coerce(b)

def mul(a, b):
    return RadicalSum.coerce(a) * RadicalSum.coerce(b)

def sqrt_rational(q):
    if isinstance(q, RadicalSum):
        return q.sqrt()
    return RadicalSum.sqrtRational(q)

def sign(a):
    return RadicalSum.coerce(a).sign()

def compare(a, b):
    # returns -1, 0 or 1 like the classic cmp
    return sign(RadicalSum.coerce(a) - RadicalSum.coerce(b)).value
