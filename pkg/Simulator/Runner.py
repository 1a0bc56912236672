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

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from Arithmetic.Radical import RadicalSum, Sign, ZERO, compare
from IR.Depth import unroll_depth
from IR.Transformer import TransformerIR, Attention, FeedForward, Gadget, PositionEncoding, DecisionRule, BOS, BLANK
from IR.Validate import validateOrRaise
from Simulator.Attention import ahat_attention
from Simulator.Gadgets import gadget_apply, gadgetReads
from Simulator.Prenorm import layer_norm
from Simulator.Trace import Trace, SublayerRecord
from Utils.Errorhandling import DomainError, Out_Of_Range


@dataclass(frozen=True)
class PaddedInput:
    ''' Physical token sequence "$" · w · "□"^p(n)

        Positions are 1 based: BoS sits at physical position 1 and logical position i at i+1.
    '''

    word: Tuple[str, ...]
    padding: int

    @property
    def n(self):
        return len(self.word)

    @property
    def length(self):
        return 1 + self.n + self.padding

    @property
    def tokens(self):
        return (BOS,) + self.word + (BLANK,) * self.padding

    def physical(self, i: int):
        if not 1 <= i <= self.n:
            raise DomainError("simulator", Out_Of_Range, f"logical position {i} outside 1..{self.n}")
        return i + 1

    def logical(self, p: int):
        return p - 1 if 2 <= p <= self.n + 1 else None


@dataclass
class RunState:
    padded: PaddedInput
    residuals: list             # tuple of RadicalSum per position
    iterations: int             # executed loop iterations
    trace: Trace
    step: int = 0


@dataclass
class RunResult:
    decision: object            # 0/1 for the sign rule, a token for argmax
    trace: Trace
    residuals: list
    padded: PaddedInput
    iterations: int

    def __iter__(self):
        # unpacks as (decision, trace)
        return iter((self.decision, self.trace))


def _relu(x: RadicalSum):
    return x if x.sign() == Sign.positive else ZERO


def _addDelta(h, delta):
    if not delta:
        return h
    updated = list(h)
    for c, x in delta.items():
        updated[c] = updated[c] + x
    return tuple(updated)


def tokenize(t: TransformerIR, w):
    # a word is a string of single character tokens or any sequence of tokens

    tokens = tuple(w)
    allowed = set(t.inputAlphabet())
    for token in tokens:
        if token not in allowed:
            raise DomainError("simulator", "unknown_token", f"token '{token}' is not in the input alphabet")
    return tokens


class Simulator():
    ''' Exact executor of one transformer

        The transformer is validated once on construction; every run shares the immutable IR.
        strictNorms asserts the declared read norm of attention sublayers at every position.
    '''

    def __init__(self, t: TransformerIR, strictNorms: bool=True):

        self.__logger = logging.getLogger("Simulator")
        validateOrRaise(t)

        self.t           = t
        self.strictNorms = strictNorms
        self.__m         = t.width

    def pad(self, w):

        word = tokenize(self.t, w)
        if self.t.max_length is not None and len(word) > self.t.max_length:
            raise DomainError("simulator", Out_Of_Range, f"word length {len(word)} exceeds bound {self.t.max_length}")

        return PaddedInput(word, self.t.padding.count(len(word)))

    def embed(self, padded: PaddedInput):

        t = self.t
        N = padded.length
        residuals = []
        for p, token in enumerate(padded.tokens, start=1):
            h = [ZERO] * self.__m
            for c, value in t.embed(token):
                h[c] = h[c] + RadicalSum(value)

            if t.position_encoding == PositionEncoding.inverse_index:
                h[t.position_channel] = h[t.position_channel] + RadicalSum(Fraction(1, p))
            elif t.position_encoding == PositionEncoding.index_over_length:
                h[t.position_channel] = h[t.position_channel] + RadicalSum(Fraction(p, N))

            residuals.append(tuple(h))

        return residuals

    # ----------------------------------------------------------------------------------------------
    # phases

    def start(self, w, trace=True):
        # embedding and block A

        padded = self.pad(w)
        self.__logger.debug(f"Run on {padded.n} tokens, physical length {padded.length}")

        state = RunState(padded, self.embed(padded), 0, Trace(trace, padded.tokens, self.t.channels))
        self.__block(state, "A", self.t.blocks.A, 0)
        state.trace.snapshot("A", state.residuals)
        return state

    def resume(self, state: RunState, iterations: int):
        # executes the loop block the given number of further times, the passed state stays untouched

        state = RunState(state.padded, list(state.residuals), state.iterations, state.trace, state.step)
        for _ in range(iterations):
            state.iterations += 1
            self.__block(state, "B", self.t.blocks.B, state.iterations)
            state.trace.snapshot(f"B{state.iterations}", state.residuals)
        return state

    def finish(self, state: RunState):
        # block C and the readout at the last position

        state = RunState(state.padded, list(state.residuals), state.iterations, state.trace, state.step)
        self.__block(state, "C", self.t.blocks.C, 0)
        state.trace.snapshot("C", state.residuals)

        decision = self.readout(state.residuals[-1])
        return RunResult(decision, state.trace, state.residuals, state.padded, state.iterations)

    def run(self, w, trace=True, iterations: Optional[int]=None):

        state = self.start(w, trace)
        if iterations is None:
            iterations = unroll_depth(self.t, state.padded.length)
        return self.finish(self.resume(state, iterations))

    def readout(self, h):

        r = self.t.readout
        if r.rule == DecisionRule.sign:
            value = RadicalSum()
            for c, coefficient in r.vector:
                value = value + h[c].scale(coefficient)
            return 1 if value.sign() == Sign.positive else 0

        #argmax over the logits, the first listed token wins ties
        best, bestToken = None, None
        for token, c in r.logits:
            if best is None or compare(h[c], best) > 0:
                best, bestToken = h[c], token
        return bestToken

    # ----------------------------------------------------------------------------------------------
    # sublayers

    def __block(self, state: RunState, block: str, sublayers, iteration: int):

        for index, s in enumerate(sublayers):
            state.step += 1
            try:
                if isinstance(s, Attention):
                    residuals, heads = self.__attention(s, state.residuals)
                elif isinstance(s, FeedForward):
                    residuals, heads = self.__feedforward(s, state.residuals), []
                else:
                    residuals, heads = self.__gadget(s, state.residuals), []

            except DomainError as e:
                self.__logger.error(f"Sublayer {block}[{index}] {s.name} failed: {e}")
                raise

            state.residuals = residuals
            trace = state.trace
            trace.add(SublayerRecord(state.step, block, iteration, index, s.name, type(s).__name__,
                                     list(residuals) if trace.keepsResiduals else None,
                                     heads if trace.keepsTies else []))

    def __normalize(self, s, h, cols, cache):
        # normalized pre-norm read, cached by the values of the read channels

        key = tuple(h[c] for c in cols)
        z = cache.get(key)
        if z is None:
            z, norm2 = layer_norm(s.prenorm.apply(h))
            if self.strictNorms and isinstance(s, Attention) and s.read_norm is not None and norm2 != s.read_norm:
                raise DomainError("simulator", "read_norm",
                                  f"read norm {norm2} of {s.name or 'attention'} differs from declared {s.read_norm}")
            cache[key] = z
        return z

    def __attention(self, s: Attention, H):

        cache, cols = {}, s.prenorm.nonzeroCols()
        reads = [self.__normalize(s, h, cols, cache) for h in H]

        d = self.__m // len(s.heads)
        outputs, records = [], []
        for head in s.heads:
            out, record = ahat_attention(head, reads)
            outputs.append(out)
            records.append(record)

        deltas = {}
        residuals = []
        for i, h in enumerate(H):
            concat = tuple((k * d + dim, x) for k, out in enumerate(outputs) for dim, x in out[i])
            delta = deltas.get(concat)
            if delta is None:
                vector = [ZERO] * self.__m
                for j, x in concat:
                    vector[j] = x
                delta = deltas[concat] = s.output.applySparse(vector)
            residuals.append(_addDelta(h, delta))

        return residuals, records

    def __feedforward(self, s: FeedForward, H):

        cache, deltas = {}, {}
        cols = s.prenorm.nonzeroCols()
        residuals = []
        for h in H:
            key = tuple(h[c] for c in cols)
            delta = deltas.get(key)
            if delta is None:
                z = self.__normalize(s, h, cols, cache)
                hidden = [_relu(x) for x in s.up.apply(z)]
                delta = deltas[key] = s.down.applySparse(hidden)
            residuals.append(_addDelta(h, delta))

        return residuals

    def __gadget(self, s: Gadget, H):

        reads = gadgetReads(s)
        deltas = {}
        residuals = []
        for h in H:
            key = tuple(h[c] for c in reads)
            delta = deltas.get(key)
            if delta is None:
                delta = deltas[key] = gadget_apply(s, h)
            residuals.append(_addDelta(h, delta))

        return residuals


def run(t: TransformerIR, w, *, trace=True, iterations: Optional[int]=None, strict_norms: bool=True):
    ''' Executes t on word w and returns a RunResult, which unpacks as (decision, trace)

        iterations overrides the unroll count of the loop block.
    '''
    return Simulator(t, strict_norms).run(w, trace, iterations)


def resume(t: TransformerIR, state: RunState, iterations: int, *, strict_norms: bool=True):
    return Simulator(t, strict_norms).resume(state, iterations)


def start(t: TransformerIR, w, *, trace=True, strict_norms: bool=True):
    return Simulator(t, strict_norms).start(w, trace)
