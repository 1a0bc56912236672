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

'''
Exact semantics of the idealized gadget sublayers

Every gadget reads its input channels at one position and returns an additive update of its
output channels:

  ln_hash      (x)            -> φ(x), x rational
  quotient     (φ(a), φ(b))   -> φ(⌊a/b⌋), a and b integers, b ≠ 0
  remainder    (φ(a), φ(b))   -> φ(a mod b), result has the sign of b
  hash_equal   (φ(a), φ(b))   -> +1 if the two blocks are identical, −1 otherwise
  bit_extract  (a, j)         -> +1 if bit j (1 = least significant) of integer a is set, −1 otherwise
  affine_int   terms          -> per output Σ coefficient·source + constant, all rational
'''

from fractions import Fraction

from Arithmetic.Radical import RadicalSum
from IR.Transformer import Gadget, GadgetKind
from Simulator.Prenorm import ln_hash, decodeHash
from Utils.Errorhandling import DomainError, Zero_Divisor


def _rationalOf(value, what):
    if not value.isRational():
        raise DomainError("gadget", "not_rational", f"{what} needs a rational input, got {value}")
    return value.rational()


def _integerOf(value, what):
    q = _rationalOf(value, what) if isinstance(value, RadicalSum) else Fraction(value)
    if q.denominator != 1:
        raise DomainError("gadget", "not_integer", f"{what} needs an integer input, got {q}")
    return q.numerator


def _form(h, pairs):
    total = RadicalSum()
    for c, coefficient in pairs:
        if h[c]:
            total = total + h[c].scale(coefficient)
    return total


def _sourceValue(h, source):

    if source.kind == "linear":
        return _rationalOf(_form(h, source.form), "affine_int")

    if source.kind == "ratio":
        numerator = _rationalOf(_form(h, source.form), "affine_int ratio")
        denominator = _rationalOf(_form(h, source.denominator), "affine_int ratio")
        if not denominator:
            raise DomainError("gadget", Zero_Divisor, "affine_int ratio with zero denominator")
        return numerator / denominator

    if source.kind == "hash":
        return decodeHash(h[source.channel:source.channel + 4])

    if source.kind == "power":
        return _rationalOf(_form(h, source.form), "affine_int power") ** source.exponent

    raise DomainError("gadget", "unknown_source", f"unknown affine source '{source.kind}'")


def _divisionOperands(h, gadget):
    a = _integerOf(decodeHash([h[c] for c in gadget.inputs[:4]]), gadget.kind.value)
    b = _integerOf(decodeHash([h[c] for c in gadget.inputs[4:]]), gadget.kind.value)
    if b == 0:
        raise DomainError("gadget", Zero_Divisor, f"{gadget.kind.value} by zero")
    return a, b


def gadget_apply(gadget: Gadget, h):
    # returns the update {channel: RadicalSum} at one position with residual h

    kind = gadget.kind

    if kind == GadgetKind.ln_hash:
        x = _rationalOf(h[gadget.inputs[0]], "ln_hash")
        return dict(zip(gadget.outputs, ln_hash(x)))

    if kind == GadgetKind.quotient:
        a, b = _divisionOperands(h, gadget)
        return dict(zip(gadget.outputs, ln_hash(a // b)))

    if kind == GadgetKind.remainder:
        a, b = _divisionOperands(h, gadget)
        return dict(zip(gadget.outputs, ln_hash(a % b)))

    if kind == GadgetKind.hash_equal:
        same = all(h[a] == h[b] for a, b in zip(gadget.inputs[:4], gadget.inputs[4:]))
        return {gadget.outputs[0]: RadicalSum(1 if same else -1)}

    if kind == GadgetKind.bit_extract:
        a = _integerOf(h[gadget.inputs[0]], "bit_extract")
        j = _integerOf(h[gadget.inputs[1]], "bit_extract")
        bit = j >= 1 and (a >> (j - 1)) & 1
        return {gadget.outputs[0]: RadicalSum(1 if bit else -1)}

    if kind == GadgetKind.affine_int:
        update = {c: Fraction(0) for c in gadget.outputs}
        for c, value in gadget.constants:
            update[c] += value
        for term in gadget.terms:
            if term.gate is not None and h[term.gate].sign().value <= 0:
                continue
            update[term.output] += term.coefficient * _sourceValue(h, term.source)
        return {c: RadicalSum(v) for c, v in update.items() if v}

    raise DomainError("gadget", "unknown_kind", f"unknown gadget kind {kind}")


def gadgetReads(gadget: Gadget):
    # all channels a gadget's result depends on

    reads = set(gadget.inputs)
    for term in gadget.terms:
        reads.update(term.source.channels())
        if term.gate is not None:
            reads.add(term.gate)
    return tuple(sorted(reads))
