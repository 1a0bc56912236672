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
Seeded generators of fuzz instances

Every generator draws from its own random.Random(seed), so one seed and one parameter set always
give the same instance. GENERATOR_VERSION changes whenever a generator draws differently.
'''

import random
from fractions import Fraction

from Circuits.Circuit import Circuit, Gate, GateKind, defaultOutput, reorder, check_circuit
from Compiler.Builder import Construction, Read, form, linear
from Compiler.Plan import ChannelPlan
from IR.Matrix import Matrix
from IR.Transformer import (TransformerIR, Blocks, Attention, FeedForward, Head, Mask, Loop, Padding, Readout,
                            DecisionRule, BOS, BLANK)
from IR.Validate import validateOrRaise
from Logic.Formula import One, N, Var, QSigma, Eq, Leq, Geq, And, Or, Not, Exists, Forall, Maj2

GENERATOR_VERSION = 1

VariableNames = ("i", "j", "k")


# --------------------------------------------------------------------------------------------------
# formulas

class _FormulaGenerator():

    def __init__(self, rng, max_k, max_depth, alphabet):
        self.rng      = rng
        self.names    = VariableNames[:max_k]
        self.depth    = max_depth
        self.alphabet = tuple(alphabet)

    def index(self, scope):
        rng = self.rng
        if scope and rng.random() < 0.75:
            return Var(rng.choice(sorted(scope)))
        return One() if rng.random() < 0.5 else N()

    def atom(self, scope):
        rng = self.rng
        if rng.random() < 0.55:
            return QSigma(rng.choice(self.alphabet), self.index(scope))
        kind = rng.choice((Eq, Leq, Geq))
        return kind(self.index(scope), self.index(scope))

    def formula(self, depth, scope):

        rng = self.rng
        if depth <= 1:
            return self.atom(scope)

        choice = rng.random()
        if choice < 0.35 and self.names:
            return self.quantifier(depth, scope)
        if choice < 0.55:
            return Not(self.formula(depth - 1, scope))
        if choice < 0.85:
            kind = rng.choice((And, Or))
            return kind(self.formula(depth - 1, scope), self.formula(rng.randint(1, depth - 1), scope))
        return self.atom(scope)

    def quantifier(self, depth, scope):

        rng = self.rng
        if len(self.names) >= 2 and rng.random() < 0.2:
            first, second = rng.sample(self.names, 2)
            return Maj2(first, second, self.formula(depth - 1, scope | {first, second}))
        #names may be rebound, shadowing the outer binding
        name = rng.choice(self.names)
        kind = rng.choice((Exists, Forall))
        return kind(name, self.formula(depth - 1, scope | {name}))


def gen_formula(seed: int, max_k: int=2, max_depth: int=3, alphabet=("a", "b")):
    ''' Random FO+M² sentence with at most max_k variable names and nesting depth ≤ max_depth + 1 '''

    if not 0 <= max_k <= 3:
        raise ValueError(f"max_k {max_k} outside 0..3")

    rng = random.Random(seed)
    generator = _FormulaGenerator(rng, max_k, max(1, max_depth), alphabet)
    if max_k and max_depth > 1:
        return generator.quantifier(max_depth, frozenset())
    return generator.formula(max_depth, frozenset())


# --------------------------------------------------------------------------------------------------
# circuits

def gen_circuit(seed: int, max_depth: int=5, max_size: int=40, arity: int=3):
    ''' Random acyclic single-output circuit on arity inputs

        Gates are serialized in a random order that keeps the X gates in input order, so pointers
        to later gates occur.
    '''

    rng = random.Random(seed)
    arity, max_depth = max(1, arity), max(1, max_depth)
    size = rng.randint(arity + 1, max(arity + 1, max_size))

    gates, depths = [Gate(GateKind.X)] * arity, [0] * arity
    while len(gates) < size:
        candidates = [i for i, d in enumerate(depths, start=1) if d < max_depth]
        kind = rng.choice((GateKind.AND, GateKind.OR, GateKind.NOT, GateKind.MAJ, GateKind.MAJ))
        fanin = 1 if kind == GateKind.NOT else rng.randint(1, min(4, len(candidates)))
        args = tuple(rng.choice(candidates) for _ in range(fanin))
        gates.append(Gate(kind, args))
        depths.append(1 + max(depths[a - 1] for a in args))

    c = check_circuit(Circuit(tuple(gates), (defaultOutput(gates),)))

    inner = [i for i in range(arity + 1, len(gates) + 1) if i != c.output]
    rng.shuffle(inner)
    order, xs = [], list(range(1, arity + 1))
    for i in inner:
        while xs and rng.random() < arity / (arity + len(inner)):
            order.append(xs.pop(0))
        order.append(i)
    return reorder(c, order + xs + [c.output])


# --------------------------------------------------------------------------------------------------
# transformers

def gen_mask_ir(seed: int, depth: int=2, mixed: bool=False, padding: bool=False):
    ''' Random unmasked (or mixed masked) transformer over {a, b} with depth attention layers

        Every attention reads ±1 sign channels only and writes an average; a sign feed-forward
        with a small offset turns the average into the next ±1 channel.
    '''

    rng = random.Random(seed)
    plan = ChannelPlan()
    one, letter, bos = plan.scalar("one"), plan.scalar("letter"), plan.scalar("bos")
    signs = [letter, bos]
    ops = Construction(plan)

    for layer in range(1, depth + 1):
        mask = Mask.causal if mixed and layer % 2 == 0 else Mask.unmasked
        heads = 2 if mixed and layer == 1 else 1

        read = Read()
        chosen = rng.sample(signs, min(len(signs), rng.randint(2, 3)))
        rows = [read.unit(form((c, 1))) for c in chosen]
        read.finish(one)

        specs, outputs = [], []
        for h in range(heads):
            query = {(d, r): rng.randint(-2, 2) for d in range(2) for r in rows}
            key   = {(d, r): rng.randint(-2, 2) for d in range(2) for r in rows}
            value = {(0, rng.choice(rows)): 1}
            specs.append((query, key, value, Mask.causal if h == 1 else mask))
            outputs.append(plan.scalar(f"average[{layer}.{h}]"))
        ops.attention(f"attention[{layer}]", read, one, specs, {(c, h, 0): 1 for h, c in enumerate(outputs)})

        result = plan.scalar(f"sign[{layer}]")
        offset = Fraction(1, 1000) if rng.random() < 0.5 else Fraction(-1, 1000)
        ops.sign(f"sign[{layer}]", form(*((c, 1) for c in outputs), (one, offset)), result)
        signs.append(result)

    plan.reserve("unused", plan.width % 2)
    embedding = {BOS:   ((one, Fraction(1)), (letter, Fraction(-1)), (bos, Fraction(1))),
                 "a":   ((one, Fraction(1)), (letter, Fraction(1)), (bos, Fraction(-1))),
                 "b":   ((one, Fraction(1)), (letter, Fraction(-1)), (bos, Fraction(-1))),
                 BLANK: ((one, Fraction(1)), (letter, Fraction(-1)), (bos, Fraction(-1)))}

    t = TransformerIR(alphabet  = (BOS, "a", "b", BLANK),
                      width     = plan.width,
                      embedding = embedding,
                      blocks    = Blocks(A=ops.build()),
                      padding   = Padding(degree=1, coefficient=1) if padding else Padding(),
                      readout   = Readout(DecisionRule.sign, ((signs[-1], Fraction(1)),)),
                      channels  = plan.names(),
                      metadata  = {"construction": "mask-corpus", "seed": seed, "depth": depth, "mixed": mixed})
    validateOrRaise(t)
    return t


def _randomMatrix(rng, rows, cols, density=0.3):
    entries = {}
    for i in range(rows):
        for j in range(cols):
            if rng.random() < density:
                entries[(i, j)] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return Matrix(rows, cols, entries)


def gen_ir(seed: int, max_width: int=8, max_sublayers: int=4):
    # small random well-formed transformer, for serialization and validation round trips

    rng = random.Random(seed)
    width = 2 * rng.randint(1, max(1, max_width // 2))
    alphabet = (BOS, "a", "b", BLANK)
    embedding = {token: tuple((c, Fraction(rng.randint(-3, 3))) for c in range(width) if rng.random() < 0.5)
                 for token in alphabet}

    sublayers = []
    for index in range(rng.randint(1, max_sublayers)):
        kind = rng.choice(("attention", "feedforward", "gadget"))
        if kind == "attention":
            heads = rng.choice((1, 2))
            d, r = width // heads, rng.randint(1, 3)
            sublayers.append(Attention(_randomMatrix(rng, r, width),
                                       tuple(Head(_randomMatrix(rng, d, r), _randomMatrix(rng, d, r),
                                                  _randomMatrix(rng, d, r), rng.choice(tuple(Mask)))
                                             for _ in range(heads)),
                                       _randomMatrix(rng, width, width, 0.1), None, f"attention[{index}]"))
        elif kind == "feedforward":
            r, hidden = rng.randint(1, 3), rng.randint(1, 4)
            sublayers.append(FeedForward(_randomMatrix(rng, r, width), _randomMatrix(rng, hidden, r),
                                         _randomMatrix(rng, width, hidden), f"feedforward[{index}]"))
        else:
            ops = Construction(ChannelPlan())
            target = rng.randrange(width)
            ops.affine(f"affine[{index}]", (target,), [linear(target, form((rng.randrange(width), rng.randint(1, 3))))],
                       constants=[(target, rng.randint(-2, 2))])
            sublayers += list(ops.build(width))

    split = rng.randint(0, len(sublayers))
    t = TransformerIR(alphabet  = alphabet,
                      width     = width,
                      embedding = embedding,
                      blocks    = Blocks(A=tuple(sublayers[:split]), B=tuple(sublayers[split:])),
                      loop      = Loop(rng.randint(0, 2), rng.randint(1, 3)),
                      padding   = Padding(rng.randint(0, 2), rng.randint(0, 2)),
                      readout   = Readout(DecisionRule.sign, ((0, Fraction(1)),)),
                      metadata  = {"construction": "random", "seed": seed})
    validateOrRaise(t)
    return t


def gen_word(rng, alphabet, max_n: int):
    n = rng.randint(0, max_n)
    return "".join(rng.choice(alphabet) for _ in range(n))


def case_seeds(seed: int, cases: int):
    # 64 bit seeds of the cases of one suite
    rng = random.Random(seed)
    return [rng.getrandbits(64) for _ in range(cases)]
