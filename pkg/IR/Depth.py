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

from IR.Transformer import TransformerIR, Attention, FeedForward, Gadget


def ceilLog2(N: int):
    return (N - 1).bit_length() if N > 1 else 0


def unroll_depth(t: TransformerIR, N: int):
    # c·⌈log₂N⌉^d, with 0⁰ = 1
    d = t.loop.exponent
    return t.loop.coefficient * (ceilLog2(N) ** d if d else 1)


def sublayer_count(t: TransformerIR, N: int):
    return len(t.blocks.A) + len(t.blocks.B) * unroll_depth(t, N) + len(t.blocks.C)


def channelsRead(s):

    if isinstance(s, (Attention, FeedForward)):
        return s.prenorm.nonzeroCols()
    reads = set(s.inputs)
    for term in s.terms:
        reads.update(term.source.channels())
        if term.gate is not None:
            reads.add(term.gate)
    return sorted(reads)


def channelsWritten(s):

    if isinstance(s, Attention):
        return s.output.nonzeroRows()
    if isinstance(s, FeedForward):
        return s.down.nonzeroRows()
    return sorted(set(s.outputs))


def parallel_depth(t: TransformerIR, iterations: int=1):
    ''' Critical path of the channel dependency graph

        Every sublayer sits one level above the deepest sublayer that last wrote one of the
        channels it reads. Sublayers reading only embedding channels are at level 1. The loop
        block is counted with the given number of iterations.
    '''

    ready = {}
    depth = 0
    for s in t.blocks.A + t.blocks.B * iterations + t.blocks.C:
        level = 1 + max((ready.get(c, 0) for c in channelsRead(s)), default=0)
        for c in channelsWritten(s):
            ready[c] = max(ready.get(c, 0), level)
        depth = max(depth, level)

    return depth
