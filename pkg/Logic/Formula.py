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
Abstract syntax of FO+M² sentences over strings

Indices denote positions 1..n: the constants One and N or a variable. Formulas combine token
predicates, comparisons and bit with the boolean connectives, the quantifiers ∃ and ∀ and the
paired majority quantifier M²(i,j). Every node may carry the source span it was parsed from;
spans never take part in equality.
'''

from dataclasses import dataclass, field
from typing import Optional, Tuple

Span = Optional[Tuple[int, int]]


@dataclass(frozen=True)
class One:
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class N:
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class QSigma:
    token: str
    index: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Eq:
    left: object
    right: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Leq:
    left: object
    right: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Geq:
    left: object
    right: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Bit:
    number: object
    position: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class And:
    left: object
    right: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Or:
    left: object
    right: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    body: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Exists:
    var: str
    body: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Forall:
    var: str
    body: object
    span: Span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Maj2:
    first: str
    second: str
    body: object
    span: Span = field(default=None, compare=False, repr=False)


Index       = (One, N, Var)
Comparison  = (Eq, Leq, Geq)
Connective  = (And, Or)
Quantifier  = (Exists, Forall, Maj2)


def indices(f):
    # the index operands of an atomic formula
    if isinstance(f, QSigma):
        return (f.index,)
    if isinstance(f, Comparison):
        return (f.left, f.right)
    if isinstance(f, Bit):
        return (f.number, f.position)
    return ()


def children(f):
    if isinstance(f, Connective):
        return (f.left, f.right)
    if isinstance(f, (Not, Exists, Forall, Maj2)):
        return (f.body,)
    return ()


def bound(f):
    # variables bound by a quantifier node
    if isinstance(f, (Exists, Forall)):
        return (f.var,)
    if isinstance(f, Maj2):
        return (f.first, f.second)
    return ()


def walk(f):
    # preorder traversal over all formula nodes
    yield f
    for child in children(f):
        yield from walk(child)


def free_variables(f):

    if isinstance(f, Quantifier):
        return free_variables(f.body) - set(bound(f))

    names = {i.name for i in indices(f) if isinstance(i, Var)}
    for child in children(f):
        names |= free_variables(child)
    return names


def is_sentence(f):
    return not free_variables(f)


def variable_names(f):
    # all variable names occurring in f, bound or free
    names = set()
    for node in walk(f):
        names.update(bound(node))
        names.update(i.name for i in indices(node) if isinstance(i, Var))
    return names


def contains_bit(f):
    return any(isinstance(node, Bit) for node in walk(f))


def nesting_depth(f):
    return 1 + max((nesting_depth(child) for child in children(f)), default=0)


def formula_metrics(f):
    # (distinct variable names k, nesting depth ℓ)
    return len(variable_names(f)), nesting_depth(f)


def _index(i):
    if isinstance(i, One):
        return "1"
    if isinstance(i, N):
        return "n"
    return i.name


def _operand(f):
    # binary operands that are quantifiers or lower binding connectives need parentheses
    text = serialize_formula(f)
    return f"({text})" if isinstance(f, Quantifier + Connective) else text


def serialize_formula(f):

    if isinstance(f, QSigma):
        return f"Q{f.token}({_index(f.index)})"
    if isinstance(f, Eq):
        return f"{_index(f.left)} = {_index(f.right)}"
    if isinstance(f, Leq):
        return f"{_index(f.left)} <= {_index(f.right)}"
    if isinstance(f, Geq):
        return f"{_index(f.left)} >= {_index(f.right)}"
    if isinstance(f, Bit):
        return f"bit({_index(f.number)},{_index(f.position)})"

    if isinstance(f, And):
        left = _operand(f.left) if not isinstance(f.left, And) else serialize_formula(f.left)
        return f"{left} & {_operand(f.right)}"
    if isinstance(f, Or):
        left = serialize_formula(f.left) if isinstance(f.left, (And, Or)) else _operand(f.left)
        right = serialize_formula(f.right) if isinstance(f.right, And) else _operand(f.right)
        return f"{left} | {right}"
    if isinstance(f, Not):
        return f"!{_operand(f.body)}" if not isinstance(f.body, Comparison) else f"!({serialize_formula(f.body)})"

    if isinstance(f, Exists):
        return f"E {f.var}. {serialize_formula(f.body)}"
    if isinstance(f, Forall):
        return f"A {f.var}. {serialize_formula(f.body)}"
    if isinstance(f, Maj2):
        return f"M2({f.first},{f.second}). {serialize_formula(f.body)}"

    raise TypeError(f"not a formula: {f!r}")
