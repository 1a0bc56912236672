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
Causal transformers computing built-in reductions tokenwise

The input is w followed by the bit_width bits of an index i, most significant bit first. Every
position counts letters and bits seen so far by uniform causal attention; the bit at rank t is
moved into an average of its own, which at the last position decodes to i. From i and n the
source position s of f(w)_i in w is computed, the letter at s is fetched by hash matching and
emitted as one-hot logits, □ when i is out of range.
'''

import logging
from fractions import Fraction

from Compiler.Builder import Construction, Read, form, linear, ratio, power
from Compiler.Plan import ChannelPlan
from IR.Transformer import TransformerIR, Blocks, Readout, DecisionRule, Mask, BOS, BLANK
from IR.Validate import validateOrRaise
from Reduce.Reduction import reduction, binary_index
from Utils.Errorhandling import DomainError

Bits = ("0", "1")

half = Fraction(1, 2)


class ReductionBuilder():

    def __init__(self, f, alphabet, bit_width: int):
        self.__logger = logging.getLogger("ReductionBuilder")
        self.f        = reduction(f)
        self.letters  = tuple(alphabet)
        self.width    = bit_width
        self.plan     = ChannelPlan()

    def build(self):

        f = self.f
        if f.name not in _Sources:
            raise DomainError("reduce", "no_transformer", f"no transformer construction for reduction '{f.name}'")
        for token in self.letters:
            if token in Bits + (BOS, BLANK):
                raise DomainError("reduce", "reserved_token", f"token '{token}' is reserved")
        if self.width < 1:
            raise DomainError("reduce", "bit_width", "at least one index bit needed")

        self.tokens = (BOS,) + self.letters + Bits
        ops = Construction(self.plan)
        self.__channels()
        self.__index(ops)
        self.__source(ops)
        self.__emit(ops)

        plan = self.plan
        t = TransformerIR(alphabet  = self.tokens + (BLANK,),
                          width     = plan.width,
                          embedding = self.__embedding(),
                          blocks    = Blocks(A=ops.build()),
                          readout   = Readout(DecisionRule.argmax, logits=tuple(self.emit.items())),
                          channels  = plan.names(),
                          metadata  = {"construction": "reduction",
                                       "reduction": f.name,
                                       "bit_width": self.width,
                                       "length": [f.coefficient, f.degree],
                                       "emit": dict(self.emit)})

        validateOrRaise(t)
        self.__logger.info(f"Built {f.name} reduction over {len(self.letters)} letters with {self.width} index bits")
        return t

    def __channels(self):

        plan = self.plan
        self.one      = plan.scalar("one")
        self.in_sign  = plan.scalar("in_sign")
        self.bos_sign = plan.scalar("bos_sign")
        self.bit_sign = plan.scalar("bit_sign")
        self.bitval   = plan.scalar("bitval")
        self.tok      = {token: plan.scalar(f"tok[{token}]") for token in self.tokens}

    def __embedding(self):

        embedding = {}
        for token in self.tokens:
            vector = {self.one:      1,
                      self.in_sign:  1 if token in self.letters else -1,
                      self.bos_sign: 1 if token == BOS else -1,
                      self.bit_sign: 1 if token in Bits else -1,
                      self.tok[token]: 1}
            if token == "1":
                vector[self.bitval] = 1
            embedding[token] = tuple(sorted((c, Fraction(q)) for c, q in vector.items()))
        return embedding

    # ----------------------------------------------------------------------------------------------
    # index

    def __index(self, ops: Construction):

        plan, one = self.plan, self.one

        fi, fbit, fb = plan.scalar("frac_input"), plan.scalar("frac_bit"), plan.scalar("frac_bos")
        read = Read()
        rows = [read.unit(form((c, 1))) for c in (self.in_sign, self.bit_sign, self.bos_sign)]
        read.finish(one)
        value = {}
        for d, r in enumerate(rows):
            value[(d, r)] = half
            value[(d, read.one)] = half
        ops.attention("counts", read, one, [({}, {}, value, Mask.causal)], {(fi, 0, 0): 1, (fbit, 0, 1): 1, (fb, 0, 2): 1})

        self.fb = fb
        self.position, self.n, seen = plan.scalar("position"), plan.scalar("n"), plan.scalar("bits_seen")
        ops.affine("ranks", (self.position, self.n, seen),
                   [ratio(self.position, form((one, 1)), form((fb, 1))),
                    ratio(self.n, form((fi, 1)), form((fb, 1))),
                    ratio(seen, form((fbit, 1)), form((fb, 1)))])

        #the bit of rank t is the only position with t bits seen so far
        signs = []
        for t in range(1, self.width + 1):
            distance, here, bit = plan.scalar(f"bit_distance[{t}]"), plan.scalar(f"at_bit[{t}]"), plan.scalar(f"bit[{t}]")
            ops.magnitude(f"bit_distance[{t}]", form((seen, 1), (one, -t)), distance)
            ops.sign(f"at_bit[{t}]", form((one, half), (distance, -1)), here, relu=True)
            ops.sign(f"bit[{t}]", form((here, 1), (self.bitval, 1), (one, -Fraction(3, 2))), bit)
            signs.append(bit)

        averages = [plan.scalar(f"bit_average[{t}]") for t in range(1, self.width + 1)]
        read = Read()
        rows = [read.unit(form((c, 1))) for c in signs]
        read.finish(one)
        value = {}
        for d, r in enumerate(rows):
            value[(d, r)] = half
            value[(d, read.one)] = half
        ops.attention("bits", read, one, [({}, {}, value, Mask.causal)], {(c, 0, d): 1 for d, c in enumerate(averages)})

        self.index, self.length = plan.scalar("index"), plan.scalar("image_length")
        terms = [ratio(self.index, form((c, 1)), form((fb, 1)), 2 ** (self.width - t))
                 for t, c in enumerate(averages, start=1)]
        terms.append(power(self.length, form((self.n, 1)), self.f.degree, self.f.coefficient))
        ops.affine("index", (self.index, self.length), terms)

    # ----------------------------------------------------------------------------------------------
    # source position

    def __source(self, ops: Construction):

        plan, one = self.plan, self.one
        self.source = plan.scalar("source")
        _Sources[self.f.name](self, ops)

        lo, up, self.valid = plan.scalar("index_lo"), plan.scalar("index_up"), plan.scalar("valid")
        ops.sign("index_lo", form((self.index, 1), (one, -half)), lo, relu=True)
        ops.sign("index_up", form((self.length, 1), (self.index, -1), (one, half)), up, relu=True)
        ops.sign("valid", form((lo, 1), (up, 1), (one, -Fraction(3, 2))), self.valid, relu=True)

    def identitySource(self, ops):
        ops.affine("source", (self.source,), [linear(self.source, form((self.index, 1)))])

    def reverseSource(self, ops):
        ops.affine("source", (self.source,), [linear(self.source, form((self.n, 1), (self.index, -1)))],
                   constants=[(self.source, 1)])

    def duplicateSource(self, ops):
        # i − n on the second copy
        second = self.plan.scalar("second_copy")
        ops.sign("second_copy", form((self.index, 1), (self.n, -1), (self.one, -half)), second, relu=True)
        ops.affine("source", (self.source,), [linear(self.source, form((self.index, 1))),
                                              linear(self.source, form((self.n, 1)), -1, gate=second)])

    # ----------------------------------------------------------------------------------------------
    # fetch and emit

    def __emit(self, ops: Construction):

        plan, one = self.plan, self.one

        before = plan.scalar("before")
        ops.affine("before", (before,), [linear(before, form((self.position, 1)))], constants=[(before, -1)])
        phi_source, phi_before = plan.block("phi_source"), plan.block("phi_before")
        ops.lnHash("hash_source", self.source, phi_source)
        ops.lnHash("hash_before", before, phi_before)

        letter = {token: plan.scalar(f"letter[{token}]") for token in self.letters}
        read = Read()
        wanted = read.block(phi_source)
        keys   = read.block(phi_before)
        rows   = dict(zip(self.tokens, read.block([self.tok[token] for token in self.tokens])))
        query = {(d, r): 1 for d, r in enumerate(wanted)}
        key   = {(d, r): 1 for d, r in enumerate(keys)}
        value = {(d, rows[token]): 1 for d, token in enumerate(self.letters)}
        ops.attention("fetch", read, one, [(query, key, value, Mask.causal)],
                      {(letter[token], 0, d): 1 for d, token in enumerate(self.letters)})

        self.emit = {}
        for token in self.letters:
            self.emit[token] = plan.scalar(f"emit[{token}]")
            ops.positive(f"emit[{token}]", form((letter[token], 1), (self.valid, half), (one, -1)), self.emit[token])
        self.emit[BLANK] = plan.scalar(f"emit[{BLANK}]")
        ops.positive(f"emit[{BLANK}]", form((one, half), (self.valid, -1)), self.emit[BLANK])


_Sources = {
    "identity":  ReductionBuilder.identitySource,
    "reverse":   ReductionBuilder.reverseSource,
    "duplicate": ReductionBuilder.duplicateSource,
}


def build_reduction_transformer(f, alphabet, bit_width: int):
    ''' Causal transformer T_f on w·b(i) whose argmax decision at the last position is r_f(w, i)

        f is the name of a built-in reduction or a Reduction with a built-in name.
    '''
    return ReductionBuilder(f, alphabet, bit_width).build()


def reduction_input(w, i: int, bit_width: int):
    # tokens of (w, b(i)) as consumed by build_reduction_transformer

    return tuple(w) + tuple(str(binary_index(i, bit_width)))
