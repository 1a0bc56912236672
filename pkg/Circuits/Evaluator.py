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
Looped transformer that evaluates a serialized circuit on an input

The input word is the input bits followed by the circuit tokens, pointers split into "&" and one
"1" token per unit. The setup block computes at every token its gate rank, X rank and argument
rank by causal counting. The last "1" of every argument (its carrier) learns the pointer value
from the position of its "&". Every gate token holds its state in two sign channels, known and
truth, starting at (−1, −1) for ⊥. One pass of the loop block lets every carrier fetch the state
of the gate it points to, every gate average the states of its carriers and resolve once all of
them are known. A gate of depth t resolves in iteration t+1 and never changes afterwards. The
scratch channels of the loop are cleared before the next iteration.
'''

import logging
from fractions import Fraction

from Arithmetic.Radical import Sign
from Circuits.Circuit import Circuit, GateKind, output_last
from Circuits.Evaluate import bits
from Compiler.Builder import Construction, Read, form, linear, ratio, hashed
from Compiler.Plan import ChannelPlan
from IR.Transformer import TransformerIR, Blocks, Loop, Padding, Readout, DecisionRule, Mask, BOS, BLANK
from IR.Validate import validateOrRaise
from Simulator.Runner import run
from Utils.Errorhandling import DomainError

GateTokens = tuple(kind.value for kind in GateKind)
Tokens     = (BOS, "0", "1") + GateTokens + ("&", BLANK)

half = Fraction(1, 2)


def encode_instance(c: Circuit, x):
    # tokens of (x, ⟨c⟩) with the output gate serialized last

    c = output_last(c)
    tokens = [str(b) for b in bits(x)]
    for g in c.gates:
        tokens.append(g.kind.value)
        for a in g.args:
            tokens += ["&"] + ["1"] * a
    return tuple(tokens)


def gate_positions(c: Circuit, x):
    # physical positions (BoS at 1) of the gate tokens of encode_instance(c, x), in gate order

    positions = []
    for p, token in enumerate(encode_instance(c, x), start=2):
        if token in GateTokens:
            positions.append(p)
    return positions


class EvaluatorBuilder():

    def __init__(self, exponent: int=1, coefficient: int=2):
        self.__logger   = logging.getLogger("CircuitEvaluator")
        self.exponent    = exponent
        self.coefficient = coefficient
        self.plan        = ChannelPlan()

    def build(self):

        self.__channels()
        setup, loop, final = Construction(self.plan), Construction(self.plan), Construction(self.plan)
        self.__setup(setup)
        self.__loop(loop)
        self.__readout(final)

        width = self.plan.width
        t = TransformerIR(alphabet  = Tokens,
                          width     = width,
                          embedding = self.__embedding(),
                          blocks    = Blocks(setup.build(width), loop.build(width), final.build(width)),
                          loop      = Loop(self.exponent, self.coefficient),
                          padding   = Padding(degree=0, coefficient=1),
                          readout   = Readout(DecisionRule.sign, ((self.result, Fraction(1)),)),
                          channels  = self.plan.names(),
                          metadata  = {"construction": "circuit-evaluator", "loop": [self.exponent, self.coefficient]})

        validateOrRaise(t)
        self.__logger.info(f"Built circuit evaluator: width {width}, loop block of {len(loop)} sublayers")
        return t

    # ----------------------------------------------------------------------------------------------
    # embedding

    def __channels(self):

        plan = self.plan
        self.one = plan.scalar("one")
        self.sign = {name: plan.scalar(f"{name}_sign") for name in ("gate", "x", "amp", "unit", "bit", "value", "bos")}
        self.kind = {kind: plan.scalar(f"is[{kind}]") for kind in GateTokens}
        self.known = plan.scalar("known")
        self.truth = plan.scalar("truth")

    def __embedding(self):

        embedding = {}
        for token in Tokens:
            flags = {"gate":  token in GateTokens,
                     "x":     token == "X",
                     "amp":   token == "&",
                     "unit":  token == "1",
                     "bit":   token in ("0", "1"),
                     "value": token == "1",
                     "bos":   token == BOS}
            vector = {self.one: 1, self.known: -1, self.truth: -1}
            for name, flag in flags.items():
                vector[self.sign[name]] = 1 if flag else -1
            if token in GateTokens:
                vector[self.kind[token]] = 1
            embedding[token] = tuple(sorted((c, Fraction(q)) for c, q in vector.items()))
        return embedding

    # ----------------------------------------------------------------------------------------------
    # setup

    def __match(self, ops, name, query, key, values, outputs, mask, bonus=None):
        # hard attention of query hash block against key hash block, bonus: ±1 channel preferring keys with +1

        read = Read()
        q = read.block(query)
        k = q if key == query else read.block(key)
        b = read.unit(form((bonus, 1))) if bonus is not None else None
        v = [read.unit(form((c, 1))) for c in values] if not isinstance(values, tuple) else read.block(values)
        read.finish(self.one)

        qm = {(d, r): 1 for d, r in enumerate(q)}
        km = {(d, r): 1 for d, r in enumerate(k)}
        if b is not None:
            qm[(4, read.one)] = 2
            km[(4, b)] = 1
        vm = {(d, r): 1 for d, r in enumerate(v)}
        head = (qm, km, vm, mask)

        ops.attention(name, read, self.one, [head], {(c, 0, d): 1 for d, c in enumerate(outputs)})
        return read, head

    def __setup(self, ops: Construction):

        plan, one, sign = self.plan, self.one, self.sign

        #causal counts of gates, X gates and arguments, and 1/p
        fractions = [plan.scalar(f"frac[{name}]") for name in ("gate", "x", "amp", "bos")]
        read = Read()
        rows = [read.unit(form((sign[name], 1))) for name in ("gate", "x", "amp", "bos")]
        read.finish(one)
        value = {}
        for d, r in enumerate(rows):
            value[(d, r)] = half
            value[(d, read.one)] = half
        ops.attention("counts", read, one, [({}, {}, value, Mask.causal)],
                      {(c, 0, d): 1 for d, c in enumerate(fractions)})

        fg, fx, fa, fb = fractions
        self.position = pos = plan.scalar("position")
        nxt, gate, arg, target = plan.scalar("next"), plan.scalar("gate"), plan.scalar("arg"), plan.scalar("x_target")
        ops.affine("ranks", (pos, nxt, gate, arg, target),
                   [ratio(pos, form((one, 1)), form((fb, 1))),
                    ratio(nxt, form((one, 1)), form((fb, 1))),
                    ratio(gate, form((fg, 1)), form((fb, 1))),
                    ratio(arg, form((fa, 1)), form((fb, 1))),
                    ratio(target, form((fx, 1)), form((fb, 1)))],
                   constants=[(nxt, 1), (target, 1)])

        hashes = {}
        for name, channel in (("position", pos), ("next", nxt), ("gate", gate), ("arg", arg), ("x_target", target)):
            hashes[name] = plan.block(f"phi_{name}")
            ops.lnHash(f"hash_{name}", channel, hashes[name])
        self.phi_gate = hashes["gate"]

        has_gate, input_bit = plan.scalar("has_gate"), plan.scalar("input_bit")
        ops.sign("has_gate", form((gate, 1), (one, -half)), has_gate)
        ops.sign("input_bit", form((sign["bit"], half), (gate, -1)), input_bit)

        #a carrier is the last "1" of an argument
        next_unit = plan.scalar("next_unit")
        self.__match(ops, "next_token", hashes["next"], hashes["position"], [sign["unit"]], (next_unit,), Mask.unmasked)
        self.carrier = plan.scalar("carrier")
        ops.sign("carrier", form((sign["unit"], half), (has_gate, half), (next_unit, -half), (one, -1)), self.carrier)

        #pointer value: distance from the "&" of the argument, 1 off carriers
        start = plan.block("phi_start")
        self.__match(ops, "argument_start", hashes["arg"], hashes["arg"], hashes["position"], start, Mask.causal,
                     bonus=sign["amp"])
        pointer = plan.scalar("pointer")
        ops.affine("pointer", (pointer,),
                   [linear(pointer, form((pos, 1), (one, -1)), gate=self.carrier),
                    hashed(pointer, start, -1, gate=self.carrier)],
                   constants=[(pointer, 1)])
        self.phi_pointer = plan.block("phi_pointer")
        ops.lnHash("hash_pointer", pointer, self.phi_pointer)

        #input bit read by every X gate
        self.xbit = plan.scalar("x_bit")
        self.__match(ops, "input", hashes["x_target"], hashes["position"], [sign["value"]], (self.xbit,), Mask.causal,
                     bonus=input_bit)

    # ----------------------------------------------------------------------------------------------
    # loop

    def __loop(self, ops: Construction):

        plan, one, kind = self.plan, self.one, self.kind

        fk, ft = plan.scalar("fetched_known"), plan.scalar("fetched_truth")
        self.__match(ops, "fetch", self.phi_pointer, self.phi_gate, [self.known, self.truth], (fk, ft), Mask.unmasked,
                     bonus=self.sign["gate"])

        ak, at = plan.scalar("avg_known"), plan.scalar("avg_truth")
        read, head = self.__match(ops, "aggregate", self.phi_gate, self.phi_gate, [fk, ft], (ak, at), Mask.unmasked,
                                  bonus=self.carrier)

        pending, falseAnd, someTrue, majority = (plan.scalar(n) for n in ("pending", "not_all_true", "some_true", "minority"))
        ops.sign("pending", form((ak, 1), (one, -1)), pending)
        ops.sign("not_all_true", form((at, 1), (one, -1)), falseAnd)
        ops.positive("some_true", form((at, 1), (one, 1)), someTrue)
        ops.positive("minority", form((at, -1)), majority)

        ready = ((one, 1), (pending, 1))
        unknown = ((one, half), (self.known, -half))
        truth = {"AND": ((one, 1), (falseAnd, 1)),
                 "OR":  ((someTrue, 1),),
                 "NOT": ((one, 1), (someTrue, -1)),
                 "MAJ": ((one, 1), (majority, -1))}

        #truth first, the known flag it depends on is set afterwards
        for name, value in truth.items():
            ops.positive(f"truth[{name}]", form(*ready, *unknown, *value, (kind[name], 1), (one, -Fraction(7, 2))),
                         self.truth, 2)
        ops.positive("truth[X]", form((kind["X"], 1), *unknown, (one, half), (self.xbit, half), (one, -Fraction(5, 2))),
                     self.truth, 2)

        inner = tuple((kind[name], 1) for name in truth)
        ops.positive("known", form(*ready, *unknown, *inner, (one, -Fraction(5, 2))), self.known, 2)
        ops.positive("known[X]", form((kind["X"], 1), *unknown, (one, -Fraction(3, 2))), self.known, 2)

        ops.attention("aggregate_clear", read, one, [head], {(ak, 0, 0): -1, (at, 0, 1): -1})
        for channel in (fk, ft, pending, falseAnd, someTrue, majority):
            ops.erase(f"clear[{plan.names()[channel]}]", channel)

    # ----------------------------------------------------------------------------------------------
    # readout

    def __readout(self, ops: Construction):
        self.result = self.plan.scalar("result")
        self.resultKnown = self.plan.scalar("result_known")
        self.__match(ops, "output_gate", self.phi_gate, self.phi_gate, [self.truth, self.known],
                     (self.result, self.resultKnown), Mask.causal, bonus=self.sign["gate"])


def build_circuit_evaluator(exponent: int=1, coefficient: int=2):
    # one looped transformer for all circuits; c·⌈log₂N⌉^d iterations on N tokens
    return EvaluatorBuilder(exponent, coefficient).build()


def evaluate_instance(t: TransformerIR, c: Circuit, x, iterations=None):
    # decision of the evaluator t on (x, ⟨c⟩), refusing a result whose output gate is still ⊥

    result = run(t, encode_instance(c, x), trace=False, iterations=iterations)
    known = result.residuals[-1][t.channelIndex("result_known")]
    if known.sign() != Sign.positive:
        raise DomainError("circuit", "unresolved_gate",
                          f"output gate unresolved after {result.iterations} iterations, the loop is too short for this circuit")
    return result.decision
