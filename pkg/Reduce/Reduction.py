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
Reductions as tokenwise functions

A reduction maps words to words, f(w), with a declared length law |f(w)| = coefficient·|w|^degree.
Its tokenwise form r_f(w, i) is the i-th token of f(w), or the blank □ for positions outside
1..|f(w)|. The reduction language R_f holds the triples (w, b(i), σ) with r_f(w, i) = σ, where b(i)
is the binary encoding of i, most significant bit first.
'''

from dataclasses import dataclass
from typing import Callable

from IR.Transformer import BLANK
from Utils.Errorhandling import DomainError


@dataclass(frozen=True)
class Reduction:
    name: str
    function: Callable
    coefficient: int = 1
    degree: int = 1

    def apply(self, w):
        return tuple(self.function(tuple(w)))

    def length(self, n: int):
        return self.coefficient * n ** self.degree

    def token(self, w, i: int):
        image = self.apply(w)
        return image[i - 1] if 1 <= i <= len(image) else BLANK


@dataclass(frozen=True)
class BinaryIndex:
    bits: str

    def __post_init__(self):
        if not self.bits or set(self.bits) - {"0", "1"}:
            raise DomainError("reduce", "not_a_binary_index", f"'{self.bits}' is no binary index")

    @property
    def value(self):
        return int(self.bits, 2)

    @property
    def width(self):
        return len(self.bits)

    def __str__(self):
        return self.bits


def binary_index(i: int, width: int):

    if i < 0 or i >= 2 ** width:
        raise DomainError("reduce", "index_width", f"{i} does not fit into {width} bits")
    return BinaryIndex(format(i, f"0{width}b"))


def bit_width(reduction: Reduction, max_length: int):
    # bits needed for every position 1..|f(w)| with |w| ≤ max_length
    return max(1, reduction.length(max_length).bit_length())


REDUCTIONS = {
    "identity":  Reduction("identity", lambda w: w),
    "reverse":   Reduction("reverse", lambda w: w[::-1]),
    "duplicate": Reduction("duplicate", lambda w: w + w, coefficient=2),
}


def reduction(name):

    if isinstance(name, Reduction):
        return name
    try:
        return REDUCTIONS[name]
    except KeyError:
        raise DomainError("reduce", "unknown_reduction", f"no built-in reduction '{name}'")


def apply_reduction(name, w):

    f = reduction(name)
    image = f.apply(w)
    if len(image) != f.length(len(tuple(w))):
        raise DomainError("reduce", "length_law", f"{f.name} maps {len(tuple(w))} tokens to {len(image)}")
    return "".join(image) if isinstance(w, str) else image


def membership_R(name, w, b_i, sigma):
    # (w, b(i), σ) ∈ R_f

    f = reduction(name)
    index = b_i if isinstance(b_i, BinaryIndex) else BinaryIndex(str(b_i))
    return f.token(w, index.value) == sigma
