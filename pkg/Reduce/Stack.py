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
Stacking a recognizer on top of a reduction

For an input w of length n the stacked transformer lays out m+1 blocks of S = 1 + n + bw
positions, m = |f(w)|, followed by the padding of T_L on m tokens. Block j replays the input of
T_f for index j: position q of the block copies token q of the original $·w, and the last bw
positions hold the bits of j, taken by bit extraction from the block index. Every attention of
T_f is confined to its own block by a hash agreement term on the block index, so the last
position of block j ≥ 1 emits f(w)_j.

T_L then runs on the virtual sequence of the last position of block 0 (its BoS), the last
positions of blocks 1..m (the tokens of f(w)) and the trailing padding. Its attention is confined
to these member positions by a dominating score term, and its position encoding is replaced by
the virtual index. The readout at the physical last position is the decision of T_L on f(w).
'''

import logging, math
from dataclasses import dataclass, replace
from fractions import Fraction

from Compiler.Builder import Construction, Read, form, linear, ratio, hashed, power
from Compiler.Plan import ChannelPlan
from IR.Transformer import (TransformerIR, Blocks, Attention, FeedForward, Gadget, Mask, Padding, PositionEncoding,
                            Readout, GadgetKind, BOS, BLANK)
from IR.Validate import validateOrRaise
from Masking.Convert import confine_attention, normExtension, isSquare, flatten
from Masking.Dominance import score_bound, choose_dominance_constant
from Reduce.Transformers import Bits
from Utils.Errorhandling import DomainError, Out_Of_Range

half = Fraction(1, 2)


@dataclass(frozen=True)
class StackBounds:
    max_length: int     # longest input word the stacked transformer accepts


def _shiftForm(pairs, columns):
    return tuple((columns[c], q) for c, q in pairs)


def _shiftGadget(g: Gadget, columns, name):

    terms = []
    for term in g.terms:
        source = term.source
        source = replace(source, form=_shiftForm(source.form, columns),
                         denominator=_shiftForm(source.denominator, columns),
                         channel=columns[source.channel] if source.kind == "hash" else source.channel)
        terms.append(replace(term, output=columns[term.output], source=source,
                             gate=None if term.gate is None else columns[term.gate]))

    return replace(g, inputs=tuple(columns[c] for c in g.inputs), outputs=tuple(columns[c] for c in g.outputs),
                   terms=tuple(terms), constants=_shiftForm(g.constants, columns), name=name)


def _shiftFeedForward(s: FeedForward, columns, width, name):
    return FeedForward(s.prenorm.remap(s.prenorm.rows, width, colMap=columns), s.up,
                       s.down.remap(width, s.down.cols, rowMap=columns), name)


class Stacker():

    def __init__(self, T_f: TransformerIR, T_L: TransformerIR, bounds: StackBounds):
        self.__logger = logging.getLogger("Stack")
        self.T_f      = T_f
        self.T_L      = T_L
        self.bounds   = bounds

    def stack(self):

        T_f, T_L = self.T_f, self.T_L
        validateOrRaise(T_f)
        validateOrRaise(T_L)
        self.__check()

        self.plan = ChannelPlan()
        self.fColumns = self.__reserve("f", T_f)
        self.lColumns = self.__reserve("L", T_L)

        setup = Construction(self.plan)
        self.__setup(setup)
        middle = Construction(self.plan)
        self.__members(middle)

        fLayers, lLayers = flatten(T_f), flatten(T_L)
        counts = {len(s.heads) for s in fLayers + lLayers if isinstance(s, Attention)} | {1}
        width = max([self.plan.width] +
                    [T_f.width + 4 * len(s.heads) for s in fLayers if isinstance(s, Attention)] +
                    [T_L.width + len(s.heads) for s in lLayers if isinstance(s, Attention)])
        step = math.lcm(*counts)
        width = -(-width // step) * step
        self.plan.reserve("stack.unused", width - self.plan.width)

        self.__dominance(fLayers, lLayers)
        sublayers  = setup.build(width)
        sublayers += tuple(self.__reduction(s, width) for s in fLayers)
        sublayers += middle.build(width)
        sublayers += tuple(self.__recognizer(s, width) for s in lLayers)

        readout = T_L.readout
        readout = Readout(readout.rule, _shiftForm(readout.vector, self.lColumns),
                          tuple((token, self.lColumns[c]) for token, c in readout.logits))

        result = TransformerIR(alphabet   = (BOS,) + self.letters + (BLANK,),
                               width      = width,
                               embedding  = self.__embedding(),
                               blocks     = Blocks(A=sublayers),
                               padding    = self.__padding(),
                               readout    = readout,
                               channels   = self.plan.names(),
                               metadata   = {"construction": "stack",
                                             "reduction": T_f.metadata.get("reduction"),
                                             "bit_width": self.bw,
                                             "length": [self.a, self.e],
                                             "dominance": {"reduction": str(self.dominanceF),
                                                           "recognizer": str(self.dominanceL)},
                                             "recognizer": dict(T_L.metadata)},
                               max_length = self.bounds.max_length)

        validateOrRaise(result)
        self.__logger.info(f"Stacked {len(fLayers)} reduction and {len(lLayers)} recognizer sublayers, "
                           f"width {width}, {self.bw} index bits")
        return result

    # ----------------------------------------------------------------------------------------------
    # preconditions

    def __check(self):

        T_f, T_L = self.T_f, self.T_L
        meta = T_f.metadata
        if "bit_width" not in meta or "length" not in meta:
            raise DomainError("stack", "reduction_metadata", "reduction transformer declares no bit width and length law")
        self.bw = int(meta["bit_width"])
        self.a, self.e = (int(x) for x in meta["length"])
        if self.e < 1 or self.a < 1:
            raise DomainError("stack", "length_law", f"length law {self.a}·n^{self.e} is not growing")

        if T_f.readout.logits == ():
            raise DomainError("stack", "reduction_readout", "reduction transformer needs argmax logits")
        if T_f.position_encoding != PositionEncoding.none or T_f.padding.count(1) or T_f.padding.count(0):
            raise DomainError("stack", "reduction_input", "reduction transformer must neither pad nor encode positions")
        if any(h.mask != Mask.causal for h in T_f.heads()):
            raise DomainError("stack", "reduction_mask", "reduction transformer must be causally masked")

        for t in (T_f, T_L):
            if t.loop.exponent != 0:
                raise DomainError("stack", "looped", "only transformers with a constant unroll count can be stacked")
            for s in flatten(t):
                if isinstance(s, Attention) and (s.read_norm is None or not isSquare(Fraction(s.read_norm))):
                    raise DomainError("stack", "irrational_read_norm", f"read norm of {s.name} is undeclared or no square")

        N = self.bounds.max_length
        if N < 0 or 2 ** self.bw <= self.a * N ** self.e:
            raise DomainError("stack", Out_Of_Range, f"{self.bw} index bits do not cover {self.a}·{N}^{self.e} positions")

        self.letters = tuple(t for t in T_f.inputAlphabet() if t not in Bits)
        if T_L.position_encoding != PositionEncoding.none and T_L.position_channel is None:
            raise DomainError("stack", "recognizer_position", "recognizer encodes positions without a channel")

    def __reserve(self, prefix, t: TransformerIR):
        # channels of t at consecutive indices, returns the index of every original channel

        names = t.channels if len(set(t.channels)) == t.width else [f"[{i}]" for i in range(t.width)]
        return [self.plan.scalar(f"{prefix}.{name}") for name in names]

    def __dominance(self, fLayers, lLayers):

        factor = lambda layers, norm: max((normExtension(Fraction(s.read_norm), norm)[0] for s in layers
                                           if isinstance(s, Attention)), default=2)

        #neighbouring block hashes agree up to 1/(2(M²+1)²)
        M = self.a * self.bounds.max_length ** self.e
        bound = max((score_bound(h) for h in self.T_f.heads()), default=Fraction(0))
        self.dominanceF = 4 * factor(fLayers, 1) * (bound + 1) * (M * M + 1) ** 2
        self.dominanceL = factor(lLayers, 2) * choose_dominance_constant(self.T_L)

    # ----------------------------------------------------------------------------------------------
    # embedding and padding

    def __embedding(self):

        plan, embedding = self.plan, {}
        for token in (BOS,) + self.letters + (BLANK,):
            vector = {plan.get("stack.one"): 1,
                      plan.get("stack.in_sign"): 1 if token in self.letters else -1,
                      plan.get("stack.bos_sign"): 1 if token == BOS else -1,
                      plan.get(f"stack.token[{token}]"): 1}
            embedding[token] = tuple(sorted((c, Fraction(q)) for c, q in vector.items()))
        return embedding

    def __padding(self):
        # (m+1)·S − 1 − n blanks for the blocks and p_L(m) behind them

        a, e, bw = self.a, self.e, self.bw
        terms = [(a * (1 + bw), e), (bw, 0)]
        terms += [(c * a ** k, e * k) for c, k in self.T_L.padding.terms() if c]
        return Padding(degree=e + 1, coefficient=a, extra=tuple(terms))

    # ----------------------------------------------------------------------------------------------
    # block layout

    def __setup(self, ops: Construction):

        plan, T_f = self.plan, self.T_f
        a, e, bw = self.a, self.e, self.bw
        one, in_sign, bos_sign = plan.scalar("stack.one"), plan.scalar("stack.in_sign"), plan.scalar("stack.bos_sign")
        tokens = [plan.scalar(f"stack.token[{token}]") for token in (BOS,) + self.letters + (BLANK,)]
        self.one = one

        fi, fb = plan.scalar("stack.frac_input"), plan.scalar("stack.frac_bos")
        read = Read()
        r_in, r_bos = read.unit(form((in_sign, 1))), read.unit(form((bos_sign, 1)))
        read.finish(one)
        value = {(0, r_in): half, (0, read.one): half, (1, r_bos): half, (1, read.one): half}
        ops.attention("stack.prefix", read, one, [({}, {}, value, Mask.causal)], {(fi, 0, 0): 1, (fb, 0, 1): 1})

        p, seen = plan.scalar("stack.position"), plan.scalar("stack.inputs_seen")
        ops.affine("stack.position", (p, seen), [ratio(p, form((one, 1)), form((fb, 1))),
                                                 ratio(seen, form((fi, 1)), form((fb, 1)))])

        #inside the input the block size is p + bw, which keeps j = 0 and q = p there
        size, before, m, end = (plan.scalar(f"stack.{name}") for name in ("block_size", "before", "blocks", "blocks_end"))
        ops.affine("stack.geometry", (size, before, m, end),
                   [linear(size, form((seen, 1))),
                    linear(before, form((p, 1))),
                    power(m, form((seen, 1)), e, a),
                    power(end, form((seen, 1)), e + 1, a),
                    power(end, form((seen, 1)), e, a * (1 + bw)),
                    linear(end, form((seen, 1)))],
                   constants=[(size, 1 + bw), (before, -1), (end, 1 + bw)])

        phi_before, phi_size = plan.block("stack.phi_before"), plan.block("stack.phi_size")
        ops.lnHash("stack.hash_before", before, phi_before)
        ops.lnHash("stack.hash_size", size, phi_size)

        self.phi_block, phi_offset = plan.block("stack.phi_block"), plan.block("stack.phi_offset")
        ops.gadget(GadgetKind.quotient, phi_before + phi_size, self.phi_block, "stack.block")
        ops.gadget(GadgetKind.remainder, phi_before + phi_size, phi_offset, "stack.offset")

        block, index, bitpos = plan.scalar("stack.block"), plan.scalar("stack.index"), plan.scalar("stack.bit_position")
        ops.affine("stack.index", (block, index, bitpos),
                   [hashed(block, self.phi_block), hashed(index, phi_offset),
                    linear(bitpos, form((seen, 1))), hashed(bitpos, phi_offset, -1)],
                   constants=[(index, 1), (bitpos, bw + 1)])

        #the token at index q of block 0 is the q-th token of $·w
        read = Read()
        wanted = read.block(phi_offset)
        keys   = read.block(phi_before)
        rows   = read.block(tokens)
        query = {(d, r): 1 for d, r in enumerate(wanted)}
        key   = {(d, r): 1 for d, r in enumerate(keys)}
        value = {(d, r): 1 for d, r in enumerate(rows)}
        output = {}
        for d, token in enumerate((BOS,) + self.letters):
            for c, q in T_f.embed(token):
                output[(self.fColumns[c], 0, d)] = q
        ops.attention("stack.copy_token", read, one, [(query, key, value, Mask.causal)], output)

        bit, isbit = plan.scalar("stack.bit"), plan.scalar("stack.is_bit")
        ops.gadget(GadgetKind.bit_extract, (block, bitpos), (bit,), "stack.bit")
        ops.sign("stack.is_bit", form((index, 1), (seen, -1), (one, -Fraction(3, 2))), isbit, relu=True)

        gates = {"1": plan.scalar("stack.is_one"), "0": plan.scalar("stack.is_zero")}
        ops.sign("stack.is_one", form((isbit, 1), (bit, half), (one, -1)), gates["1"], relu=True)
        ops.sign("stack.is_zero", form((isbit, 1), (bit, -half), (one, -1)), gates["0"], relu=True)

        terms, outputs = [], set()
        for token in Bits:
            for c, q in T_f.embed(token):
                terms.append(linear(self.fColumns[c], form((one, 1)), q, gate=gates[token]))
                outputs.add(self.fColumns[c])
        ops.affine("stack.bit_tokens", tuple(sorted(outputs)), terms)

        self.p, self.seen, self.size, self.m, self.end = p, seen, size, m, end
        self.block, self.index = block, index

    # ----------------------------------------------------------------------------------------------
    # virtual input of the recognizer

    def __members(self, ops: Construction):

        plan, one, T_L = self.plan, self.one, self.T_L
        cols = self.lColumns

        flags = {name: plan.scalar(f"stack.{name}") for name in ("distance", "final", "lo", "up", "dollar", "member_final",
                                                                 "tail", "other", "member")}
        ops.magnitude("stack.distance", form((self.index, 1), (self.size, -1)), flags["distance"])
        ops.sign("stack.final", form((one, half), (flags["distance"], -1)), flags["final"], relu=True)
        ops.sign("stack.lo", form((self.block, 1), (one, -half)), flags["lo"], relu=True)
        ops.sign("stack.up", form((self.m, 1), (self.block, -1), (one, half)), flags["up"], relu=True)
        ops.sign("stack.dollar", form((flags["final"], 1), (flags["lo"], -1), (one, -half)), flags["dollar"], relu=True)
        ops.sign("stack.member_final", form((flags["final"], 1), (flags["lo"], 1), (flags["up"], 1), (one, -Fraction(5, 2))),
                 flags["member_final"], relu=True)
        ops.sign("stack.tail", form((self.p, 1), (self.end, -1), (one, -half)), flags["tail"], relu=True)

        dollar, fr, tail = flags["dollar"], flags["member_final"], flags["tail"]
        members = ((dollar, 1), (fr, 1), (tail, 1))
        ops.sign("stack.other", form((one, half), *((c, -1) for c, _ in members)), flags["other"], relu=True)
        ops.sign("stack.member", form(*members, (one, -half)), flags["member"])
        self.member = flags["member"]

        #the emitted token of every member block, as a gate per token
        emitted = {}
        for token, c in self.T_f.readout.logits:
            if T_L.embed(token):
                emitted[token] = plan.scalar(f"stack.emitted[{token}]")
                ops.sign(f"stack.emitted[{token}]", form((fr, 1), (self.fColumns[c], 1), (one, -Fraction(3, 2))),
                         emitted[token], relu=True)

        sources = [(BOS, dollar), (BLANK, tail), (BLANK, flags["other"])] + [(token, g) for token, g in emitted.items()]
        terms, outputs = [], set()
        for token, gate in sources:
            for c, q in T_L.embed(token):
                terms.append(linear(cols[c], form((one, 1)), q, gate=gate))
                outputs.add(cols[c])

        #virtual index: 1 for BoS, j+1 for block j, m+2 onwards behind the blocks
        lpos = plan.scalar("stack.virtual_position")
        terms += [linear(lpos, form((one, 1)), gate=dollar),
                  linear(lpos, form((self.block, 1), (one, 1)), gate=fr),
                  linear(lpos, form((self.p, 1), (self.end, -1), (self.m, 1), (one, 1)), gate=tail),
                  linear(lpos, form((self.p, 1)), gate=flags["other"])]
        outputs.add(lpos)

        length = plan.scalar("stack.virtual_length")
        terms += [linear(length, form((one, 1))), power(length, form((self.seen, 1)), self.e, self.a)]
        for c, k in T_L.padding.terms():
            if c:
                terms.append(power(length, form((self.seen, 1)), self.e * k, c * self.a ** k) if k else
                             linear(length, form((one, 1)), c))
        outputs.add(length)
        ops.affine("stack.virtual_input", tuple(sorted(outputs)), terms)

        if T_L.position_encoding == PositionEncoding.inverse_index:
            target = cols[T_L.position_channel]
            ops.affine("stack.position_encoding", (target,), [ratio(target, form((one, 1)), form((lpos, 1)))])
        elif T_L.position_encoding == PositionEncoding.index_over_length:
            target = cols[T_L.position_channel]
            ops.affine("stack.position_encoding", (target,), [ratio(target, form((lpos, 1)), form((length, 1)))])

    # ----------------------------------------------------------------------------------------------
    # embedded sublayers

    def __reduction(self, s, width):

        name = f"f.{s.name}"
        if isinstance(s, Attention):
            C = self.dominanceF
            terms = lambda head: ({(k, k): C for k in range(4)}, {(k, k): 1 for k in range(4)})
            confined = confine_attention(s, width, self.one, self.phi_block, 1, terms, columns=self.fColumns)
            return replace(confined, name=name)
        if isinstance(s, FeedForward):
            return _shiftFeedForward(s, self.fColumns, width, name)
        return _shiftGadget(s, self.fColumns, name)

    def __recognizer(self, s, width):

        name = f"L.{s.name}"
        if isinstance(s, Attention):
            C = self.dominanceL
            terms = lambda head: ({(0, 1): C}, {(0, 0): 1})
            confined = confine_attention(s, width, self.one, [self.member, self.one], 2, terms, columns=self.lColumns)
            return replace(confined, name=name)
        if isinstance(s, FeedForward):
            return _shiftFeedForward(s, self.lColumns, width, name)
        return _shiftGadget(s, self.lColumns, name)


def stack(T_f: TransformerIR, T_L: TransformerIR, bounds: StackBounds):
    ''' Recognizer of {w : f(w) ∈ L} from T_f computing r_f and T_L recognizing L

        The decision of the result on w equals the decision of T_L on f(w) for all |w| ≤
        bounds.max_length. Runs need strict read norms switched off, positions outside the
        recognizer's virtual input carry residuals of no particular norm.
    '''
    return Stacker(T_f, T_L, bounds).stack()
