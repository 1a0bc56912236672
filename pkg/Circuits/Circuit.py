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
Serialized threshold circuits

Text format, whitespace separated tokens:

    Circuit → Gate*  [OUT 1^m]
    Gate    → X | Op Arg*
    Op      → AND | OR | NOT | MAJ
    Arg     → &1^j          (pointer to the j-th gate, 1-based)

The k-th X gate returns the k-th input bit. Pointers may refer to gates serialized later, only
cycles are rejected. Without the OUT marker the output gate is the last serialized gate that no
other gate references; "OUT 1^m" declares the last m serialized gates as outputs, in order.
'''

import re
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from Utils.Errorhandling import ParseError, DomainError


class GateKind(Enum):
    X   = "X"
    AND = "AND"
    OR  = "OR"
    NOT = "NOT"
    MAJ = "MAJ"


class GateState(Enum):
    zero   = 0
    one    = 1
    bottom = "⊥"

    @classmethod
    def of(cls, value):
        # None stands for ⊥
        return cls.bottom if value is None else (cls.one if value else cls.zero)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    args: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Circuit:
    gates: Tuple[Gate, ...]
    outputs: Tuple[int, ...]

    @property
    def arity(self):
        return sum(1 for g in self.gates if g.kind == GateKind.X)

    @property
    def output(self):
        return self.outputs[-1]

    def gate(self, index: int):
        return self.gates[index - 1]

    def inputs(self):
        # gate indices of the X gates in input order
        return tuple(i for i, g in enumerate(self.gates, start=1) if g.kind == GateKind.X)

    def __len__(self):
        return len(self.gates)


def sinks(gates):
    referenced = {a for g in gates for a in g.args}
    return [i for i in range(1, len(gates) + 1) if i not in referenced]


def defaultOutput(gates):
    found = sinks(gates)
    return found[-1] if found else len(gates)


def topological_order(c: Circuit):
    # gate indices with every gate after its arguments; raises on cycles

    order, state = [], {}
    for root in range(1, len(c.gates) + 1):
        if root in state:
            continue
        stack = [(root, iter(c.gate(root).args))]
        state[root] = "open"
        while stack:
            node, pending = stack[-1]
            child = next(pending, None)
            if child is None:
                stack.pop()
                state[node] = "done"
                order.append(node)
            elif state.get(child) == "open":
                raise ParseError("circuit", "cycle", f"gate {child} depends on itself")
            elif child not in state:
                state[child] = "open"
                stack.append((child, iter(c.gate(child).args)))
    return order


def check_circuit(c: Circuit):

    if not c.gates:
        raise ParseError("circuit", "empty", "circuit without gates")

    for i, g in enumerate(c.gates, start=1):
        if g.kind == GateKind.X and g.args:
            raise ParseError("circuit", "arity", f"X gate {i} takes no arguments")
        if g.kind == GateKind.NOT and len(g.args) != 1:
            raise ParseError("circuit", "arity", f"NOT gate {i} needs exactly one argument")
        if g.kind != GateKind.X and not g.args:
            raise ParseError("circuit", "arity", f"{g.kind.value} gate {i} without arguments")
        for a in g.args:
            if not 1 <= a <= len(c.gates):
                raise ParseError("circuit", "dangling_pointer", f"gate {i} points to missing gate {a}")

    for o in c.outputs:
        if not 1 <= o <= len(c.gates):
            raise ParseError("circuit", "dangling_pointer", f"output {o} is no gate")

    topological_order(c)
    return c


_token = re.compile(r"\S+")
_pointer = re.compile(r"&(1+)")


def parse_circuit(text: str):

    gates, current, marker = [], None, None
    tokens = list(_token.finditer(text))

    index = 0
    while index < len(tokens):
        match = tokens[index]
        word, location = match.group(), match.start()
        index += 1

        if marker is not None:
            raise ParseError("circuit", "syntax", "tokens after the output marker", location)

        if word == "OUT":
            if index >= len(tokens) or set(tokens[index].group()) != {"1"}:
                raise ParseError("circuit", "syntax", "OUT needs a unary gate count", location)
            marker = len(tokens[index].group())
            index += 1
            continue

        pointer = _pointer.fullmatch(word)
        if pointer:
            if current is None:
                raise ParseError("circuit", "syntax", "argument before the first gate", location)
            current[1].append(len(pointer.group(1)))
            continue

        try:
            kind = GateKind(word)
        except ValueError:
            raise ParseError("circuit", "lexical", f"unknown token '{word}'", location)

        current = (kind, [])
        gates.append(current)

    gates = tuple(Gate(kind, tuple(args)) for kind, args in gates)
    if marker is None:
        outputs = (defaultOutput(gates),) if gates else ()
    else:
        if marker > len(gates):
            raise ParseError("circuit", "dangling_pointer", f"{marker} outputs declared for {len(gates)} gates")
        outputs = tuple(range(len(gates) - marker + 1, len(gates) + 1))

    return check_circuit(Circuit(gates, outputs))


def serialize_circuit(c: Circuit):

    words = []
    for g in c.gates:
        words.append(g.kind.value)
        words += ["&" + "1" * a for a in g.args]

    m = len(c.outputs)
    if c.outputs == (defaultOutput(c.gates),):
        pass
    elif c.outputs == tuple(range(len(c.gates) - m + 1, len(c.gates) + 1)):
        words += ["OUT", "1" * m]
    else:
        raise DomainError("circuit", "unserializable_outputs", "outputs must be the last serialized gates")

    return " ".join(words)


def reorder(c: Circuit, order):
    ''' Serializes the gates of c in the given order of old gate indices

        Pointers and outputs are renumbered, so the circuit computes the same function as long as
        the relative order of the X gates is kept.
    '''

    order = list(order)
    if sorted(order) != list(range(1, len(c.gates) + 1)):
        raise DomainError("circuit", "not_a_permutation", f"{order} is no ordering of {len(c.gates)} gates")

    position = {old: new for new, old in enumerate(order, start=1)}
    gates = tuple(Gate(c.gate(old).kind, tuple(position[a] for a in c.gate(old).args)) for old in order)
    return Circuit(gates, tuple(position[o] for o in c.outputs))


def output_last(c: Circuit):
    # single output circuit reordered so that its output is the final gate

    if len(c.outputs) != 1:
        raise DomainError("circuit", "multiple_outputs", f"{len(c.outputs)} outputs, one expected")
    if c.output == len(c.gates):
        return c
    order = [i for i in range(1, len(c.gates) + 1) if i != c.output] + [c.output]
    return reorder(c, order)
