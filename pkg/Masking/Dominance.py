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

from IR.Transformer import TransformerIR, Head


def score_bound(head: Head):
    # |qᵀk| ≤ Σ_d ‖Q_d‖₁·‖K_d‖₁ for reads whose entries are bounded by 1 (unit pre-norm outputs)

    bound = Fraction(0)
    for d in range(head.query.rows):
        q = sum((abs(v) for _, v in head.query.row(d)), Fraction(0))
        if q:
            bound += q * sum((abs(v) for _, v in head.key.row(d)), Fraction(0))
    return bound


def choose_dominance_constant(t: TransformerIR):
    ''' Score offset that outweighs every difference of original attention scores

        With B the largest score bound over all heads, every original score lies in [−B, B]; the
        constant 2(B+1) exceeds the whole range, so a key carrying the offset always beats a key
        without it. The bound does not depend on the input length.
    '''

    bound = max((score_bound(h) for h in t.heads()), default=Fraction(0))
    return 2 * (bound + 1)
