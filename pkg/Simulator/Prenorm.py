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

from Arithmetic.Radical import RadicalSum, ZERO
from Utils.Errorhandling import DomainError, Nested_Radical


def squaredNorm(vector):

    total = ZERO
    for x in vector:
        if x:
            total = total + x * x
    return total


def layer_norm(vector):
    ''' L2 normalization onto the unit sphere, without centering or learned scale

        Returns (normalized, squared norm). The zero vector maps to itself. The squared norm has to
        be rational, otherwise the result would need nested radicals.
    '''

    norm2 = squaredNorm(vector)
    if not norm2:
        return tuple(vector), Fraction(0)

    if not norm2.isRational():
        raise DomainError("prenorm", Nested_Radical, f"nested radical outside exact domain: squared norm {norm2}")

    q = norm2.rational()
    if q == 1:
        return tuple(vector), q

    root = RadicalSum.sqrtRational(q)
    return tuple(x / root if x else x for x in vector), q


def masked_prenorm(h, M):
    # z = layer_norm(M·h)
    return layer_norm(M.apply(h))[0]


def ln_hash(z):
    # φ(z) = ⟨z, 1, −z, −1⟩ / √(2z² + 2) for a rational z

    z = Fraction(z)
    root = RadicalSum.sqrtRational(2 * z * z + 2)
    one = RadicalSum(1) / root
    value = RadicalSum(z) / root
    return (value, one, -value, -one)


def hashDot(i, j):
    # φ(i)·φ(j) in closed form (ij+1)/√((i²+1)(j²+1))
    i, j = Fraction(i), Fraction(j)
    return RadicalSum(i * j + 1) / RadicalSum.sqrtRational((i * i + 1) * (j * j + 1))


def decodeHash(block):
    # integer (rational) z with block = φ(z); the block must be a scaled LnHash

    a0, a1, a2, a3 = block
    if not a1:
        raise DomainError("gadget", "not_a_hash", f"cannot decode hash block {tuple(str(x) for x in block)}")
    return a0.ratio(a1)
