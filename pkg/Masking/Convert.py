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
Conversion of unmasked and mixed masked transformers into causally masked ones

The converted input is the original padded input followed by L blocks of blanks, each as long as
the original sequence N′ (BoS included), where L counts the attention sublayers with at least one
unmasked head. Every position first recovers its block j and its index q inside the block and
copies the embedding of the original token at position q, so every block replays the original
computation. Unmasked heads of block j are confined to block j−1 and causal heads to their own
block by a dominating score offset; block 0 queries of unmasked heads fall back to the BoS token.
Block j reproduces the original residuals up to its (j+1)-th unmasked attention sublayer, so the
last block reproduces them completely.
'''

import logging, math
from fractions import Fraction

from Compiler.Builder import Construction, Read, form, linear, ratio, hashed, power
from Compiler.Plan import ChannelPlan
from IR.Matrix import Matrix
from IR.Transformer import (TransformerIR, Blocks, Attention, FeedForward, Head, Mask, Padding, PositionEncoding,
                            GadgetKind, BOS)
from IR.Validate import validateOrRaise
from Masking.Dominance import choose_dominance_constant
from Utils.Errorhandling import DomainError


def isSquare(q: Fraction):
    return all(math.isqrt(x) ** 2 == x for x in (q.numerator, q.denominator))


def _sqrt(q: Fraction):
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


def normExtension(read_norm: Fraction, norm=2):
    # smallest λ ≥ 2 with (λ²−1)·read_norm − norm a nonnegative integer, and that integer

    factor = 2
    while True:
        extra = (factor * factor - 1) * read_norm - norm
        if extra >= 0 and extra.denominator == 1:
            return factor, int(extra)
        factor += 1


def confine_attention(s: Attention, width, one, extra, norm, terms, columns=None, mask=None):
    ''' Attention s with additional read rows and additional score terms

        extra   - channels of the additional read rows, their joint squared norm is the constant norm
        terms   - function head -> (query, key), dicts (slot, extra row) -> coefficient on the raw extra
                  rows; slot k is head dimension d + k behind the d original dimensions
        columns - new channel index of every channel of s, the identity if None
        mask    - mask of all heads, unchanged if None

        Copies of the constant channel one pad the read to λ²·read_norm, so the original rows are
        normalized by λ times their old norm and the original query, key and value matrices are
        scaled by λ.
    '''

    rn = Fraction(s.read_norm)
    factor, ones = normExtension(rn, norm)
    scale = factor * _sqrt(rn)
    columns = columns if columns is not None else range(width)

    r = s.prenorm.rows
    entries = {(i, columns[c]): v for (i, c), v in s.prenorm.entries()}
    for k, c in enumerate(list(extra) + [one] * ones):
        entries[(r + k, c)] = entries.get((r + k, c), 0) + 1
    rows = r + len(extra) + ones
    prenorm = Matrix(rows, width, entries)

    h = len(s.heads)
    d, dn = s.output.cols // h, width // h

    heads = []
    for head in s.heads:
        query = {key: factor * v for key, v in head.query.entries()}
        key   = {key: factor * v for key, v in head.key.entries()}
        value = {key: factor * v for key, v in head.value.entries()}

        extraQuery, extraKey = terms(head)
        for (slot, row), v in extraQuery.items():
            query[(d + slot, r + row)] = v * scale
        for (slot, row), v in extraKey.items():
            key[(d + slot, r + row)] = v * scale

        heads.append(Head(Matrix(dn, rows, query), Matrix(dn, rows, key), Matrix(dn, rows, value),
                          head.mask if mask is None else mask))

    output = {(columns[c], (j // d) * dn + j % d): v for (c, j), v in s.output.entries()}
    return Attention(prenorm, tuple(heads), Matrix(width, width, output), factor * factor * rn, s.name)


def unmasked_layers(t: TransformerIR):
    return sum(1 for s in flatten(t) if isinstance(s, Attention) and any(h.mask == Mask.unmasked for h in s.heads))


def flatten(t: TransformerIR):
    return t.blocks.A + t.blocks.B * t.loop.coefficient + t.blocks.C


class MaskConverter():

    def __init__(self, t: TransformerIR):
        self.__logger = logging.getLogger("MaskConvert")
        self.t = t

    def convert(self):

        t = self.t
        validateOrRaise(t)

        if not t.heads() or t.isCausal():
            self.__logger.warning("Transformer is already causally masked, returned unchanged")
            return t

        if t.loop.exponent != 0:
            raise DomainError("convert", "looped", "only transformers with a constant unroll count can be converted")

        sublayers = flatten(t)
        for s in sublayers:
            if isinstance(s, Attention):
                if s.read_norm is None:
                    raise DomainError("convert", "undeclared_read_norm", f"attention {s.name} declares no read norm")
                if not isSquare(Fraction(s.read_norm)):
                    raise DomainError("convert", "irrational_read_norm", f"read norm {s.read_norm} of {s.name} is no square")

        #keys of blocks that no longer follow the original residuals score up to λ·B
        factor = max(normExtension(Fraction(s.read_norm))[0] for s in sublayers if isinstance(s, Attention))
        self.blocks    = unmasked_layers(t)
        self.dominance = factor * choose_dominance_constant(t)

        self.plan = ChannelPlan()
        names = t.channels if len(set(t.channels)) == t.width else [f"orig[{i}]" for i in range(t.width)]
        for name in names:
            self.plan.scalar(name)

        setup = Construction(self.plan)
        self.__setup(setup)

        #every head needs room for the block slots next to its original dimensions
        counts = {len(s.heads) for s in sublayers if isinstance(s, Attention)} | {1}
        step = math.lcm(*counts)
        width = max(self.plan.width, max(t.width + h * (self.blocks + 2) for h in counts))
        width = -(-width // step) * step
        self.plan.reserve("mask.unused", width - self.plan.width)

        converted = [self.__sublayer(s, width) for s in sublayers]
        result = TransformerIR(alphabet          = t.alphabet,
                               width             = width,
                               embedding         = self.__embedding(),
                               blocks            = Blocks(A=setup.build(width) + tuple(converted)),
                               position_encoding = PositionEncoding.none,
                               padding           = self.__padding(),
                               readout           = t.readout,
                               channels          = self.plan.names(),
                               metadata          = {"construction": "mask-convert",
                                                    "blocks": self.blocks,
                                                    "dominance": str(self.dominance),
                                                    "setup": len(setup),
                                                    "source": dict(t.metadata)},
                               max_length        = t.max_length)

        validateOrRaise(result)
        self.__logger.info(f"Converted {len(sublayers)} sublayers with {self.blocks} blocks, dominance {self.dominance}")
        return result

    # ----------------------------------------------------------------------------------------------
    # setup

    def __embedding(self):

        plan, embedding = self.plan, {}
        for token in self.t.alphabet:
            vector = {plan.get("mask.one"): 1,
                      plan.get("mask.in_sign"): 1 if token in self.t.inputAlphabet() else -1,
                      plan.get("mask.bos_sign"): 1 if token == BOS else -1,
                      plan.get("mask.bos_flag" if token == BOS else "mask.later_flag"): 1,
                      plan.get(f"mask.token[{token}]"): 1}
            embedding[token] = tuple(sorted((c, Fraction(q)) for c, q in vector.items()))
        return embedding

    def __padding(self):
        # L·N′ further blanks after the original padding: L + L·n + (L+1)·p(n)

        L = self.blocks
        terms = [((L + 1) * c, k) for c, k in self.t.padding.terms() if c] + [(L, 0), (L, 1)]
        (c0, k0), rest = terms[0], terms[1:]
        return Padding(degree=k0, coefficient=c0, extra=tuple(rest))

    def __setup(self, ops: Construction):

        plan, t = self.plan, self.t
        one, in_sign, bos_sign = plan.scalar("mask.one"), plan.scalar("mask.in_sign"), plan.scalar("mask.bos_sign")
        plan.scalar("mask.bos_flag")
        plan.scalar("mask.later_flag")
        tokens = [plan.scalar(f"mask.token[{a}]") for a in t.alphabet]

        #causal averages: inputs seen so far over p, and 1/p
        fi, fb = plan.scalar("mask.frac_input"), plan.scalar("mask.frac_bos")
        read = Read()
        r_in, r_bos = read.unit(form((in_sign, 1))), read.unit(form((bos_sign, 1)))
        read.finish(one)
        value = {(0, r_in): Fraction(1, 2), (0, read.one): Fraction(1, 2),
                 (1, r_bos): Fraction(1, 2), (1, read.one): Fraction(1, 2)}
        ops.attention("prefix", read, one, [({}, {}, value, Mask.causal)], {(fi, 0, 0): 1, (fb, 0, 1): 1})

        #on blanks all inputs are seen, which fixes the original length N′ = 1 + n + p(n)
        p, seen = plan.scalar("mask.position"), plan.scalar("mask.inputs_seen")
        ops.affine("position", (p, seen), [ratio(p, form((one, 1)), form((fb, 1))),
                                           ratio(seen, form((fi, 1)), form((fb, 1)))])

        length, before = plan.scalar("mask.length"), plan.scalar("mask.before")
        terms = [linear(length, form((seen, 1)))]
        terms += [power(length, form((seen, 1)), k, c) for c, k in t.padding.terms() if c]
        terms += [linear(before, form((p, 1)))]
        ops.affine("length", (length, before), terms, constants=[(length, 1), (before, -1)])

        phi_before, phi_length = plan.block("mask.phi_before"), plan.block("mask.phi_length")
        ops.lnHash("hash_before", before, phi_before)
        ops.lnHash("hash_length", length, phi_length)

        phi_block, phi_offset = plan.block("mask.phi_block"), plan.block("mask.phi_offset")
        ops.gadget(GadgetKind.quotient, phi_before + phi_length, phi_block, "block")
        ops.gadget(GadgetKind.remainder, phi_before + phi_length, phi_offset, "offset")

        block, index = plan.scalar("mask.block"), plan.scalar("mask.index")
        ops.affine("index", (block, index), [hashed(block, phi_block), hashed(index, phi_offset)],
                   constants=[(index, 1)])

        #one-hot block indicators
        self.indicators = []
        for b in range(self.blocks + 1):
            distance, indicator = plan.scalar(f"mask.block_distance[{b}]"), plan.scalar(f"mask.in_block[{b}]")
            ops.magnitude(f"block_distance[{b}]", form((block, 1), (one, -b)), distance)
            ops.sign(f"in_block[{b}]", form((one, Fraction(1, 2)), (distance, -1)), indicator, relu=True)
            self.indicators.append(indicator)

        #copy the original embedding of the token at index q of block 0
        read = Read()
        wanted = read.block(phi_offset)
        keys   = read.block(phi_before)
        rows   = read.block(tokens)
        query = {(d, r): 1 for d, r in enumerate(wanted)}
        key   = {(d, r): 1 for d, r in enumerate(keys)}
        value = {(d, r): 1 for d, r in enumerate(rows)}
        output = {(c, 0, d): q for d, token in enumerate(t.alphabet) for c, q in t.embed(token)}
        ops.attention("copy_token", read, one, [(query, key, value, Mask.causal)], output)

        if t.position_encoding == PositionEncoding.inverse_index:
            ops.affine("position_encoding", (t.position_channel,),
                       [ratio(t.position_channel, form((one, 1)), form((index, 1)))])
        elif t.position_encoding == PositionEncoding.index_over_length:
            ops.affine("position_encoding", (t.position_channel,),
                       [ratio(t.position_channel, form((index, 1)), form((length, 1)))])

    # ----------------------------------------------------------------------------------------------
    # original sublayers

    def __sublayer(self, s, width):

        if isinstance(s, Attention):
            return self.__attention(s, width)

        if isinstance(s, FeedForward):
            return FeedForward(Matrix(s.prenorm.rows, width, s.prenorm.entries()), s.up,
                               Matrix(width, s.down.cols, s.down.entries()), s.name)

        return s

    def __attention(self, s: Attention, width):

        plan, C, L = self.plan, self.dominance, self.blocks
        extra = list(self.indicators) + [plan.get("mask.bos_flag"), plan.get("mask.later_flag")]

        def terms(head):
            # block b scores in slot b+1, slot 0 is the BoS fallback of block 0
            query, key = {}, {(0, L + 1): 1}
            for b in range(L + 1):
                target = b - 1 if head.mask == Mask.unmasked else b
                query[(1 + target, b)] = C
                key[(1 + b, b)] = 1
            return query, key

        return confine_attention(s, width, plan.get("mask.one"), extra, 2, terms, mask=Mask.causal)


def to_causal(t: TransformerIR):
    # causally masked transformer whose last block reproduces t's residuals channel for channel
    return MaskConverter(t).convert()


def convert_report(t: TransformerIR, converted: TransformerIR, lengths=range(0, 5)):
    # added padding per input length n

    report = []
    for n in lengths:
        original = 1 + n + t.padding.count(n)
        physical = 1 + n + converted.padding.count(n)
        report.append({"n": n, "original_length": original, "converted_length": physical,
                       "added_padding": physical - original})
    return {"blocks": converted.metadata.get("blocks", 0), "dominance": converted.metadata.get("dominance"),
            "lengths": report}
