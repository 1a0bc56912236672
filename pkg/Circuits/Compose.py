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
Composition of circuits

The X gates of a block that is fed by another circuit are replaced by identity gates (single
argument AND) pointing at the feeding outputs. Composite circuits list their outputs as the final
gates, so they serialize with the OUT marker.
'''

from Circuits.Circuit import Circuit, Gate, GateKind, check_circuit
from Utils.Errorhandling import DomainError


def identity(index: int):
    return Gate(GateKind.AND, (index,))


def _embed(c: Circuit, offset: int, feeds):
    # gates of c shifted by offset, its k-th X gate copying gate feeds[k]

    rank = {g: k for k, g in enumerate(c.inputs())}
    gates = []
    for i, g in enumerate(c.gates, start=1):
        if g.kind == GateKind.X:
            gates.append(identity(feeds[rank[i]]))
        else:
            gates.append(Gate(g.kind, tuple(a + offset for a in g.args)))
    return gates


def _finish(gates, outputs):
    # appends copies of the outputs so they become the final gates

    n = len(gates)
    gates = list(gates) + [identity(o) for o in outputs]
    return check_circuit(Circuit(tuple(gates), tuple(range(n + 1, n + len(outputs) + 1))))


def compose_serial(cf: Circuit, cg: Circuit):
    # x ↦ g(f(x))

    if cg.arity != len(cf.outputs):
        raise DomainError("compose", "arity_mismatch", f"{len(cf.outputs)} outputs feed {cg.arity} inputs")

    offset = len(cf.gates)
    gates = list(cf.gates) + _embed(cg, offset, cf.outputs)
    return _finish(gates, [o + offset for o in cg.outputs])


def compose_parallel(cf: Circuit, cg: Circuit):
    # x ↦ (f(x), g(x)) on shared inputs

    if cf.arity != cg.arity:
        raise DomainError("compose", "arity_mismatch", f"input arities {cf.arity} and {cg.arity} differ")

    n = cf.arity
    shared = list(range(1, n + 1))
    gates = [Gate(GateKind.X)] * n
    gates += _embed(cf, len(gates), shared)
    first = len(gates) - len(cf.gates)
    gates += _embed(cg, len(gates), shared)
    second = len(gates) - len(cg.gates)

    return _finish(gates, [o + first for o in cf.outputs] + [o + second for o in cg.outputs])


def compose_recurrent(cf: Circuit, r: int):
    # x ↦ f^r(x)

    if r < 1:
        raise DomainError("compose", "repetitions", f"{r} repetitions, at least one needed")
    if cf.arity != len(cf.outputs):
        raise DomainError("compose", "arity_mismatch", f"{cf.arity} inputs and {len(cf.outputs)} outputs differ")

    result = cf
    for _ in range(r - 1):
        result = compose_serial(result, cf)
    return result
