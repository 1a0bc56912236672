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
Compiler from FO+M² sentences to padded unmasked AHATs

The compiled transformer pads the input with n^k blank tokens, one per assignment of the k
variables: the blank at physical position n+1+v stands for the assignment with index v. Every
subformula is evaluated at every blank for that blank's assignment and kept as a sign channel
(+1 true, −1 false). The decision is read at the last blank.

Layer groups:
  setup       - n, the logical position hash and the decoded variable values of every blank
  atoms       - token predicates by hash retrieval, comparisons by sign thresholds
  connectives - sign thresholds on sums of child signs
  quantifiers - averaging over the blanks that agree on all other variables, thresholded
'''

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from Compiler.Builder import Construction, Read, form, linear, ratio, hashed, power
from Compiler.Plan import ChannelPlan
from IR.Transformer import (TransformerIR, Blocks, Padding, Readout, DecisionRule, PositionEncoding, GadgetKind, Mask,
                            BOS, BLANK)
from IR.Validate import validateOrRaise
from Logic.Evaluate import eval_formula
from Logic.Formula import (One, N, Var, QSigma, Eq, Leq, Geq, Bit, And, Or, Not, Exists, Forall, Maj2,
                           walk, bound, indices, free_variables, contains_bit, formula_metrics, serialize_formula)
from Utils.Errorhandling import DomainError

# parallel_depth(compile(f)) ≤ DEPTH_SLOPE·ℓ + DEPTH_OFFSET
DEPTH_SLOPE  = 3
DEPTH_OFFSET = 12

DummyVariable = "_"


@dataclass(frozen=True)
class CompiledArtifact:
    transformer: TransformerIR
    plan: ChannelPlan
    metrics: Tuple[int, int]


def variable_order(f):
    # variable names by first occurrence, binders and indices in preorder

    order = []
    for node in walk(f):
        names = list(bound(node)) + [i.name for i in indices(node) if isinstance(i, Var)]
        for name in names:
            if name not in order:
                order.append(name)
    return order


class FormulaCompiler():

    def __init__(self, f, alphabet, promote_constant=True, strict_sublayers=False, scratch_offset=0):

        self.__logger   = logging.getLogger("Compiler")
        self.original   = f
        self.alphabet   = tuple(alphabet)
        self.promote    = promote_constant
        self.strict     = strict_sublayers
        self.offset     = scratch_offset

        self.plan = ChannelPlan()
        self.ops  = Construction(self.plan)
        self.__emitted = {}

    # ----------------------------------------------------------------------------------------------
    # entry

    def compile(self):

        f = self.original
        if contains_bit(f):
            raise DomainError("compile", "bit_unsupported", "formulas with bit cannot be compiled")
        unbound = free_variables(f)
        if unbound:
            raise DomainError("compile", "not_a_sentence", f"free variables {sorted(unbound)}")
        for token in self.alphabet:
            if token in (BOS, BLANK):
                raise DomainError("compile", "reserved_token", f"token '{token}' is reserved")

        metrics = formula_metrics(f)
        if metrics[0] == 0:
            if not self.promote:
                raise DomainError("compile", "constant_sentence", "sentence without variables and no promotion")
            f = Exists(DummyVariable, f)

        self.variables = variable_order(f)
        self.k = len(self.variables)

        self.__embedding()
        self.__setup()
        self.plan.reserve("unused", self.offset)

        root = self.__emit(f)

        #the empty word has only the BoS token, its decision is fixed by the empty flag
        empty = 1 if eval_formula(self.original, ()) else -1
        final = self.plan.scalar("decision")
        self.ops.sign("decision", form((root, 1), (self.empty, 3 * empty)), final)

        t = self.__transformer(final, metrics)
        validateOrRaise(t, self.strict)

        self.__logger.info(f"Compiled '{serialize_formula(self.original)}': k={metrics[0]}, depth {metrics[1]}, "
                           f"width {t.width}, {len(t.blocks.A)} sublayers")
        return CompiledArtifact(t, self.plan, metrics)

    def __transformer(self, final, metrics):

        plan = self.plan
        embedding = {}
        for token in (BOS,) + self.alphabet + (BLANK,):
            vector = {plan.get("one"): 1}
            vector[plan.get("in_sign")]  = 1 if token in self.alphabet else -1
            vector[plan.get("pad_sign")] = 1 if token == BLANK else -1
            vector[plan.get("bos_sign")] = 1 if token == BOS else -1
            if token in self.alphabet:
                vector[plan.get(f"tok[{token}]")] = 1
            for c, q in zip(plan.get("phi_one"), (Fraction(1, 2), Fraction(1, 2), Fraction(-1, 2), Fraction(-1, 2))):
                vector[c] = q
            embedding[token] = tuple(sorted((c, Fraction(q)) for c, q in vector.items()))

        return TransformerIR(alphabet          = (BOS,) + self.alphabet + (BLANK,),
                             width             = plan.width,
                             embedding         = embedding,
                             blocks            = Blocks(A=self.ops.build()),
                             position_encoding = PositionEncoding.inverse_index,
                             position_channel  = plan.get("pos"),
                             padding           = Padding(degree=self.k, coefficient=1),
                             readout           = Readout(DecisionRule.sign, ((final, Fraction(1)),)),
                             channels          = plan.names(),
                             metadata          = {"construction": "fo-compile",
                                                  "formula": serialize_formula(self.original),
                                                  "variables": metrics[0], "depth": metrics[1]})

    # ----------------------------------------------------------------------------------------------
    # setup

    def __embedding(self):

        plan = self.plan
        for token in self.alphabet:
            plan.scalar(f"tok[{token}]")
        self.one      = plan.scalar("one")
        self.in_sign  = plan.scalar("in_sign")
        self.pad_sign = plan.scalar("pad_sign")
        self.bos_sign = plan.scalar("bos_sign")
        self.pos      = plan.scalar("pos")
        self.phi_one  = plan.block("phi_one")

    def __setup(self):

        plan, ops, one = self.plan, self.ops, self.one

        #fraction of input tokens n/N and of the BoS token 1/N
        fi, fb = plan.scalar("frac_input"), plan.scalar("frac_bos")
        read = Read()
        r_in, r_bos = read.unit(form((self.in_sign, 1))), read.unit(form((self.bos_sign, 1)))
        read.finish(one)
        value = {(0, r_in): Fraction(1, 2), (0, read.one): Fraction(1, 2),
                 (1, r_bos): Fraction(1, 2), (1, read.one): Fraction(1, 2)}
        ops.attention("uniform", read, one, [({}, {}, value, Mask.unmasked)], {(fi, 0, 0): 1, (fb, 0, 1): 1})

        #empty word flag, and n' = max(n, 1) so that divisions by n stay defined
        self.empty = plan.scalar("empty")
        ops.sign("empty", form((fb, 1), (one, Fraction(-3, 4))), self.empty, relu=True)
        count = form((fi, 1), (self.empty, 1))

        self.phi_n = plan.block("phi_n")
        ops.hash("hash_n", count, form((fb, 1)), self.phi_n)

        self.hash_lpos = plan.block("hash_lpos")
        ops.hash("hash_lpos", form((one, 1), (self.pos, -1)), form((self.pos, 1)), self.hash_lpos)

        #assignment offset v−1 of a blank at physical position p = n+1+v
        self.nval, offset = plan.scalar("n"), plan.scalar("offset")
        ops.affine("offset", (self.nval, offset),
                   [ratio(self.nval, count, form((fb, 1))),
                    ratio(offset, form((one, 1)), form((self.pos, 1))),
                    ratio(offset, count, form((fb, 1)), -1)],
                   constants=[(offset, -2)])
        phi_offset = plan.block("phi_offset")
        ops.lnHash("hash_offset", offset, phi_offset)

        #variable t is the t-th base n' digit of v−1, plus one
        powers = [plan.scalar(f"radix[{t}]") for t in range(self.k)]
        ops.affine("radix", powers, [power(powers[t], form((self.nval, 1)), t) for t in range(self.k)])

        self.val, self.phi_val, self.eqone = [], [], []
        for t in range(self.k):
            phi_power = plan.block(f"phi_radix[{t}]")
            ops.lnHash(f"hash_radix[{t}]", powers[t], phi_power)

            shifted, digit = plan.block(f"shifted[{t}]"), plan.block(f"digit[{t}]")
            ops.gadget(GadgetKind.quotient, phi_offset + phi_power, shifted, f"shift[{t}]")
            ops.gadget(GadgetKind.remainder, shifted + self.phi_n, digit, f"digit[{t}]")

            val = plan.scalar(f"val[{t}]")
            ops.affine(f"val[{t}]", (val,), [hashed(val, digit)], constants=[(val, 1)])

            phi_val = plan.block(f"phi_val[{t}]")
            ops.lnHash(f"hash_val[{t}]", val, phi_val)

            eqone = plan.scalar(f"eqone[{t}]")
            ops.gadget(GadgetKind.hash_equal, phi_val + self.phi_one, (eqone,), f"eqone[{t}]")

            self.val.append(val)
            self.phi_val.append(phi_val)
            self.eqone.append(eqone)

    # ----------------------------------------------------------------------------------------------
    # subformulas

    def __slot(self, name):
        return self.variables.index(name)

    def __value(self, i):
        if isinstance(i, One):
            return self.one
        if isinstance(i, N):
            return self.nval
        return self.val[self.__slot(i.name)]

    def __hash(self, i):
        if isinstance(i, One):
            return self.phi_one
        if isinstance(i, N):
            return self.phi_n
        return self.phi_val[self.__slot(i.name)]

    def __emit(self, f):

        text = serialize_formula(f)
        if f in self.__emitted:
            return self.__emitted[f]

        children = [self.__emit(child) for child in _children(f)]
        name = f"node[{len(self.__emitted)}]"
        out = self.plan.scalar(name)
        ops, one = self.ops, self.one

        if isinstance(f, QSigma):
            self.__predicate(name, f, out)

        elif isinstance(f, (Leq, Geq)):
            small, large = (f.left, f.right) if isinstance(f, Leq) else (f.right, f.left)
            ops.sign(name, form((self.__value(large), 1), (self.__value(small), -1), (one, Fraction(1, 2))), out)

        elif isinstance(f, Eq):
            distinct = self.plan.scalar(name + ".distinct")
            ops.magnitude(name + ".distinct", form((self.__value(f.left), 1), (self.__value(f.right), -1)), distinct)
            ops.sign(name, form((one, Fraction(1, 2)), (distinct, -1)), out)

        elif isinstance(f, Not):
            ops.sign(name, form((children[0], -1)), out)

        elif isinstance(f, And):
            ops.sign(name, form((children[0], 1), (children[1], 1), (one, -1)), out)

        elif isinstance(f, Or):
            ops.sign(name, form((children[0], 1), (children[1], 1), (one, 1)), out)

        elif isinstance(f, (Exists, Forall, Maj2)):
            self.__quantifier(name, f, children[0], out)

        else:
            raise DomainError("compile", "unsupported", f"cannot compile {text}")

        self.__emitted[f] = out
        self.plan.nodes[text] = out
        return out

    def __predicate(self, name, f, out):
        # retrieves the token at the position the index denotes, ±1 for token = σ

        ops, one = self.ops, self.one
        if f.token not in self.alphabet:
            ops.sign(name, form((one, -1)), out)
            return

        read = Read()
        target = read.block(self.__hash(f.index))
        keys   = read.block(self.hash_lpos)
        token  = read.unit(form((self.plan.get(f"tok[{f.token}]"), 2), (one, -1)))

        query = {(d, r): 1 for d, r in enumerate(target)}
        key   = {(d, r): 1 for d, r in enumerate(keys)}
        ops.attention(name, read, one, [(query, key, {(0, token): 1}, Mask.unmasked)], {(out, 0, 0): 1})

    def __quantifier(self, name, f, body, out):
        # averages over the blanks that agree with the query blank on all other variables

        ops, one, plan = self.ops, self.one, self.plan
        quantified = bound(f)
        others = [t for t, v in enumerate(self.variables) if v not in quantified]

        read = Read()
        blocks = [read.block(self.phi_val[t]) for t in others]
        pad    = read.unit(form((self.pad_sign, 1)))
        truth  = read.unit(form((body, 1)))
        first  = read.unit(form((self.eqone[self.__slot(quantified[0])], 1)))
        read.finish(one)

        query, key = {}, {}
        dim = 0
        for rows in blocks:
            for r in rows:
                query[(dim, r)] = 1
                key[(dim, r)] = 1
                dim += 1
        #blanks outscore every other token by far more than any hash agreement
        query[(dim, read.one)] = self.k
        key[(dim, pad)] = 1

        share, unique = plan.scalar(name + ".share"), plan.scalar(name + ".first")
        value = {(0, truth): 1, (1, first): 1}
        ops.attention(name + ".average", read, one, [(query, key, value, Mask.unmasked)],
                      {(share, 0, 0): 1, (unique, 0, 1): 1})

        #share = 2c/|S| − 1 for c satisfied blanks, unique = 2/n − 1
        if isinstance(f, Exists):
            ops.sign(name, form((share, 1), (unique, Fraction(-1, 2)), (one, Fraction(1, 2))), out)
        elif isinstance(f, Forall):
            ops.sign(name, form((share, 2), (unique, 1), (one, -1)), out)
        else:
            majority = plan.scalar(name + ".majority")
            ops.sign(name + ".majority", form((share, 1)), majority)
            ops.sign(name, form((majority, 1), (one, Fraction(-1, 2))), out)


def _children(f):
    if isinstance(f, (And, Or)):
        return (f.left, f.right)
    if isinstance(f, (Not, Exists, Forall, Maj2)):
        return (f.body,)
    return ()


def compile(f, alphabet, *, promote_constant=True, strict_sublayers=False, scratch_offset=0):
    ''' Compiles the sentence f over the alphabet into a CompiledArtifact

        scratch_offset inserts unused channels in front of the subformula channels.
    '''
    return FormulaCompiler(f, alphabet, promote_constant, strict_sublayers, scratch_offset).compile()
