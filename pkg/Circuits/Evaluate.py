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

import mpmath

from Circuits.Circuit import Circuit, GateKind, topological_order
from Utils.Errorhandling import DomainError


def bits(x):
    # "101", (1, 0, 1) or [True, False, True] -> (1, 0, 1)

    if isinstance(x, str):
        if set(x) - {"0", "1"}:
            raise DomainError("circuit", "not_a_bit_word", f"'{x}' is no bit word")
        return tuple(int(b) for b in x)
    return tuple(1 if b else 0 for b in x)


def gateValue(kind: GateKind, args):

    if kind == GateKind.AND:
        return int(all(args))
    if kind == GateKind.OR:
        return int(any(args))
    if kind == GateKind.NOT:
        return 1 - args[0]
    # ties at exactly half count as true
    return int(2 * sum(args) >= len(args))


def gate_values(c: Circuit, x):
    ''' Values of all gates on input x, keyed by gate index '''

    x = bits(x)
    if len(x) != c.arity:
        raise DomainError("circuit", "arity_mismatch", f"{len(x)} input bits for {c.arity} X gates")

    rank = {g: k for k, g in enumerate(c.inputs())}
    values = {}
    for i in topological_order(c):
        g = c.gate(i)
        if g.kind == GateKind.X:
            values[i] = x[rank[i]]
        else:
            values[i] = gateValue(g.kind, [values[a] for a in g.args])
    return values


def eval_circuit(c: Circuit, x):
    return gate_values(c, x)[c.output]


def eval_outputs(c: Circuit, x):
    values = gate_values(c, x)
    return tuple(values[o] for o in c.outputs)


def gate_depths(c: Circuit):
    # X gates sit at depth 0

    depths = {}
    for i in topological_order(c):
        g = c.gate(i)
        depths[i] = 0 if g.kind == GateKind.X else 1 + max(depths[a] for a in g.args)
    return depths


def depth(c: Circuit):
    return max(gate_depths(c).values())


def size(c: Circuit):
    return len(c.gates)


def is_wide_witness(c: Circuit, n: int, c_param, d: int):
    ''' Whether c meets the size and depth bounds of a wide threshold circuit family at input size n

        size(c) ≥ n^c_param and depth(c) ≤ c_param·(log₂ n)^d
    '''

    if n < 2:
        raise DomainError("circuit", "input_size", f"input size {n} below 2")

    c_param = Fraction(c_param)
    p, q = c_param.numerator, c_param.denominator
    wide = size(c) ** q >= n ** p

    if d == 0 or n & (n - 1) == 0:
        shallow = depth(c) <= c_param * (n.bit_length() - 1) ** d
    else:
        #log₂ n is irrational here, equality cannot occur
        with mpmath.workdps(60):
            bound = mpmath.mpf(p) / q * mpmath.log(n, 2) ** d
            shallow = depth(c) <= bound

    return bool(wide and shallow)
