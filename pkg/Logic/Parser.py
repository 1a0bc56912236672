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
Recursive descent parser for the formula text grammar

    formula    := disjunct ( "|" disjunct )*
    disjunct   := unary ( "&" unary )*
    unary      := "!" unary | quantifier | "(" formula ")" | atom
    quantifier := "E" var "." formula | "A" var "." formula | "M2" "(" var "," var ")" "." formula
    atom       := "Q"token "(" index ")" | "bit" "(" index "," index ")" | index ("<=" | ">=" | "=") index
    index      := "1" | "n" | var

A quantifier body extends as far to the right as possible. Variables are lower case identifiers
other than "n" and "bit".
'''

import re

from Logic.Formula import One, N, Var, QSigma, Eq, Leq, Geq, Bit, And, Or, Not, Exists, Forall, Maj2
from Utils.Errorhandling import ParseError

_tokenizer = re.compile(r"""
    (?P<space>\s+)
  | (?P<pred>Q[^\s(),.&|!<>=]+)(?=\()
  | (?P<maj>M2)
  | (?P<quant>[EA])(?![A-Za-z0-9_])
  | (?P<name>[a-z_][A-Za-z0-9_']*)
  | (?P<number>[0-9]+)
  | (?P<op><=|>=|[=&|!().,])
""", re.VERBOSE)


def _tokens(text):
    # list of (kind, value, offset), kind one of pred/maj/quant/name/number/op/end

    result = []
    pos = 0
    while pos < len(text):
        match = _tokenizer.match(text, pos)
        if not match:
            raise ParseError("formula", "lexical", f"unexpected character '{text[pos]}' at column {pos + 1}", pos)
        kind = match.lastgroup
        if kind != "space":
            value = match.group(kind)
            result.append((kind, value[1:] if kind == "pred" else value, pos))
        pos = match.end()

    result.append(("end", "", len(text)))
    return result


class _Parser():

    def __init__(self, text):
        self.text   = text
        self.tokens = _tokens(text)
        self.pos    = 0

    @property
    def current(self):
        return self.tokens[self.pos]

    def fail(self, expected):
        kind, value, offset = self.current
        found = "end of input" if kind == "end" else f"'{value}'"
        raise ParseError("formula", "syntax", f"expected {expected} at column {offset + 1}, found {found}", offset)

    def accept(self, value):
        kind, v, _ = self.current
        if kind == "op" and v == value:
            self.pos += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            self.fail(f"'{value}'")

    def span(self, start):
        # source range from the start offset to the end of the previous token
        kind, value, offset = self.tokens[self.pos - 1]
        return (start, offset + len(value) + (1 if kind == "pred" else 0))

    def parse(self):
        f = self.formula()
        if self.current[0] != "end":
            self.fail("end of formula")
        return f

    def formula(self):
        start = self.current[2]
        f = self.disjunct()
        while self.accept("|"):
            right = self.disjunct()
            f = Or(f, right, span=self.span(start))
        return f

    def disjunct(self):
        start = self.current[2]
        f = self.unary()
        while self.accept("&"):
            right = self.unary()
            f = And(f, right, span=self.span(start))
        return f

    def unary(self):

        kind, value, start = self.current

        if kind == "op" and value == "!":
            self.pos += 1
            body = self.unary()
            return Not(body, span=self.span(start))

        if kind == "quant":
            self.pos += 1
            var = self.variable()
            self.expect(".")
            body = self.formula()
            node = Exists if value == "E" else Forall
            return node(var, body, span=self.span(start))

        if kind == "maj":
            self.pos += 1
            self.expect("(")
            first = self.variable()
            self.expect(",")
            second = self.variable()
            self.expect(")")
            self.expect(".")
            body = self.formula()
            if first == second:
                raise ParseError("formula", "syntax", f"M2 needs two distinct variables at column {start + 1}", start)
            return Maj2(first, second, body, span=self.span(start))

        if kind == "op" and value == "(":
            self.pos += 1
            f = self.formula()
            self.expect(")")
            return f

        return self.atom()

    def atom(self):

        kind, value, start = self.current

        if kind == "pred":
            self.pos += 1
            self.expect("(")
            index = self.index()
            self.expect(")")
            return QSigma(value, index, span=self.span(start))

        if kind == "name" and value == "bit":
            self.pos += 1
            self.expect("(")
            number = self.index()
            self.expect(",")
            position = self.index()
            self.expect(")")
            return Bit(number, position, span=self.span(start))

        left = self.index()
        for op, node in (("<=", Leq), (">=", Geq), ("=", Eq)):
            if self.accept(op):
                right = self.index()
                return node(left, right, span=self.span(start))

        self.fail("comparison operator")

    def index(self):

        kind, value, start = self.current
        if kind == "number" and value == "1":
            self.pos += 1
            return One(span=(start, start + 1))
        if kind == "name" and value == "n":
            self.pos += 1
            return N(span=(start, start + 1))
        if kind == "name" and value != "bit":
            self.pos += 1
            return Var(value, span=(start, start + len(value)))
        self.fail("index (1, n or a variable)")

    def variable(self):
        kind, value, _ = self.current
        if kind != "name" or value in ("n", "bit"):
            self.fail("variable name")
        self.pos += 1
        return value


def parse_formula(text: str):
    # formula text -> AST with source spans; raises ParseError with the offending offset
    return _Parser(text).parse()
