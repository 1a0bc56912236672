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
Construction kit shared by all transformer constructions

Sublayers are recorded against channel indices while the channel plan still grows and are
materialized into matrices of the final width by build(). All reads of attention sublayers are
padded with copies of the constant channel until their squared norm is a perfect square s², which
makes the pre-norm a division by the rational s; the query, key and value entries given to the
builder refer to the unnormalized read and are rescaled by s.
'''

import math
from fractions import Fraction

from IR.Matrix import Matrix
from IR.Transformer import Attention, FeedForward, Gadget, GadgetKind, Head, AffineTerm, AffineSource


def form(*pairs):
    # linear form from (channel, coefficient) pairs
    return tuple((c, Fraction(q)) for c, q in pairs)


class Read():
    ''' Rows of an attention pre-norm read with a known constant squared norm '''

    def __init__(self):
        self.rows  = []
        self.norm2 = Fraction(0)
        self.one   = None
        self.scale = None

    def row(self, f, norm2=0):
        # one row reading the linear form f; norm2 is its constant squared contribution
        self.rows.append(tuple(f))
        self.norm2 += Fraction(norm2)
        return len(self.rows) - 1

    def unit(self, f):
        # a row whose value is ±1 at every position
        return self.row(f, 1)

    def block(self, channels, norm2=1):
        # a group of rows copying channels whose joint squared norm is constant
        rows = [self.row(((c, Fraction(1)),)) for c in channels]
        self.norm2 += Fraction(norm2)
        return rows

    def finish(self, one: int):
        # pads with the constant channel to a perfect square, always adding at least one pad row

        if self.scale is not None:
            return self.scale

        total = self.norm2
        if total.denominator != 1:
            raise ValueError("read norms must be integral")
        s = math.isqrt(int(total)) + 1
        first = None
        for _ in range(s * s - int(total)):
            r = self.unit(((one, Fraction(1)),))
            first = r if first is None else first
        self.one   = first
        self.scale = s
        return s


def _rowEntries(rows):
    # prenorm entries, repeated channels within one row add up
    entries = {}
    for r, f in enumerate(rows):
        for c, q in f:
            entries[(r, c)] = entries.get((r, c), 0) + q
    return entries


class _AttentionSpec():

    def __init__(self, name, read, scale, heads, output):
        self.name   = name
        self.read   = read
        self.scale  = scale
        self.heads  = heads
        self.output = output

    def build(self, width):

        rows = self.read.rows
        prenorm = Matrix(len(rows), width, _rowEntries(rows))
        s = self.scale
        d = width // len(self.heads)

        heads = []
        for query, key, value, mask in self.heads:
            heads.append(Head(Matrix(d, len(rows), {k: v * s for k, v in query.items()}),
                              Matrix(d, len(rows), {k: v * s for k, v in key.items()}),
                              Matrix(d, len(rows), {k: v * s for k, v in value.items()}),
                              mask))

        output = Matrix(width, width, {(c, k * d + dim): q for (c, k, dim), q in self.output.items()})
        return Attention(prenorm, tuple(heads), output, Fraction(s * s), self.name)


class _FeedForwardSpec():

    def __init__(self, name, rows, up, down):
        self.name = name
        self.rows = rows
        self.up   = up
        self.down = down

    def build(self, width):
        prenorm = Matrix(len(self.rows), width, _rowEntries(self.rows))
        hidden = 1 + max(h for h, _ in self.up)
        up = Matrix(hidden, len(self.rows), self.up)
        down = Matrix(width, hidden, self.down)
        return FeedForward(prenorm, up, down, self.name)


class _Fixed():

    def __init__(self, sublayer):
        self.sublayer = sublayer

    def build(self, width):
        return self.sublayer


class Construction():
    ''' Sequence of sublayers under construction '''

    def __init__(self, plan):
        self.plan    = plan
        self.__specs = []

    def __len__(self):
        return len(self.__specs)

    def build(self, width=None):
        width = self.plan.width if width is None else width
        return tuple(spec.build(width) for spec in self.__specs)

    # ----------------------------------------------------------------------------------------------
    # attention

    def attention(self, name, read: Read, one: int, heads, output):
        ''' Appends an attention sublayer

            heads  - list of (query, key, value, mask), each a dict (dim, read row) -> coefficient
            output - dict (channel, head, dim) -> coefficient
        '''
        scale = read.finish(one)
        self.__specs.append(_AttentionSpec(name, read, scale, heads, output))
        return read

    # ----------------------------------------------------------------------------------------------
    # feedforward

    def feedforward(self, name, rows, up, down):
        # up: dict (hidden, read row) -> q, down: dict (channel, hidden) -> q
        self.__specs.append(_FeedForwardSpec(name, tuple(tuple(f) for f in rows), up, down))

    def sign(self, name, f, output, relu=False):
        # writes sign(f) ∈ {−1, 0, 1} into output, or max(sign(f), 0) with relu
        down = {(output, 0): 1} if relu else {(output, 0): 1, (output, 1): -1}
        self.feedforward(name, [f], {(0, 0): 1, (1, 0): -1}, down)

    def positive(self, name, f, output, coefficient=1):
        # adds coefficient·[f > 0] to output
        self.feedforward(name, [f], {(0, 0): 1}, {(output, 0): coefficient})

    def erase(self, name, channel):
        # clears a channel holding −1, 0 or 1
        self.feedforward(name, [((channel, Fraction(1)),)], {(0, 0): 1, (1, 0): -1}, {(channel, 0): -1, (channel, 1): 1})

    def magnitude(self, name, f, output):
        # writes |sign(f)| ∈ {0, 1} into output
        self.feedforward(name, [f], {(0, 0): 1, (1, 0): -1}, {(output, 0): 1, (output, 1): 1})

    def normalized(self, name, rows, outputs):
        # writes the normalized read itself into outputs
        up, down = {}, {}
        for r, c in enumerate(outputs):
            up[(2 * r, r)] = 1
            up[(2 * r + 1, r)] = -1
            down[(c, 2 * r)] = 1
            down[(c, 2 * r + 1)] = -1
        self.feedforward(name, rows, up, down)

    def hash(self, name, numerator, denominator, outputs):
        # writes φ(numerator/denominator) for a positive denominator
        neg = lambda f: tuple((c, -q) for c, q in f)
        self.normalized(name, [numerator, denominator, neg(numerator), neg(denominator)], outputs)

    # ----------------------------------------------------------------------------------------------
    # gadgets

    def gadget(self, kind: GadgetKind, inputs, outputs, name="", terms=(), constants=()):
        self.__specs.append(_Fixed(Gadget(kind, tuple(inputs), tuple(outputs), tuple(terms),
                                          tuple((c, Fraction(q)) for c, q in constants), True, name)))

    def lnHash(self, name, channel, outputs):
        self.gadget(GadgetKind.ln_hash, (channel,), outputs, name)

    def affine(self, name, outputs, terms, constants=()):
        self.gadget(GadgetKind.affine_int, (), outputs, name, terms, constants)


def linear(output, f, coefficient=1, gate=None):
    return AffineTerm(output, Fraction(coefficient), AffineSource("linear", tuple(f)), gate)


def ratio(output, numerator, denominator, coefficient=1, gate=None):
    return AffineTerm(output, Fraction(coefficient), AffineSource("ratio", tuple(numerator), tuple(denominator)), gate)


def hashed(output, block, coefficient=1, gate=None):
    return AffineTerm(output, Fraction(coefficient), AffineSource("hash", channel=block[0]), gate)


def power(output, f, exponent, coefficient=1, gate=None):
    return AffineTerm(output, Fraction(coefficient), AffineSource("power", tuple(f), exponent=exponent), gate)
