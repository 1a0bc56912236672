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

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from Arithmetic.Radical import RadicalSum, compare
from IR.Transformer import Head, Mask

IntervalBits = 64


def _sparse(matrix, z):
    return tuple(sorted(matrix.applySparse(z).items()))


def _dot(q, k):
    # q, k: sorted tuples of (dim, RadicalSum)
    kd = dict(k)
    total = RadicalSum()
    for d, x in q:
        y = kd.get(d)
        if y is not None:
            total = total + x * y
    return total


def _accumulate(acc: dict, vector):
    for d, x in vector:
        acc[d] = acc[d] + x if d in acc else x


class _Score():
    # exact score with a cached dyadic enclosure, compared cheaply when the enclosures separate

    __slots__ = ("value", "lo", "hi")

    def __init__(self, value: RadicalSum):
        self.value = value
        self.lo, self.hi = value.interval(IntervalBits)

    def cmp(self, other):
        if self.hi < other.lo:
            return -1
        if self.lo > other.hi:
            return 1
        return compare(self.value, other.value)


@dataclass
class HeadRecord:
    ''' Argmax bookkeeping of one head over all query positions

        keyClasses[c] lists the (0-based) positions whose key vector is the c-th distinct one.
        ties[i] = (classes, upto): the tie set of query i is every position of the listed key
        classes that is ≤ upto (upto is None for unmasked heads).
    '''

    mask: Mask
    keyClasses: List[List[int]]
    ties: List[Tuple[Tuple[int, ...], Optional[int]]]

    def tieSet(self, i: int):
        classes, upto = self.ties[i]
        positions = [p for c in classes for p in self.keyClasses[c] if upto is None or p <= upto]
        return sorted(positions)

    def certified(self, i: int):
        # a tie set is certified when all tied keys are the identical canonical vector
        return len(self.ties[i][0]) == 1


def ahat_attention(head: Head, reads):
    ''' Averaging hard attention of one head over all positions

        reads - normalized pre-norm read z_j per position
        Returns (outputs, record): outputs[i] is the head output at query i as sparse tuple of
        (dim, RadicalSum), the average of the values over the exact argmax set of scores.
    '''

    N = len(reads)
    queries = [_sparse(head.query, z) for z in reads]
    keys    = [_sparse(head.key, z) for z in reads]
    values  = [_sparse(head.value, z) for z in reads]

    #group identical keys: scores only depend on the key vector
    keyIndex, keyClasses, keyOf = {}, [], []
    for j, k in enumerate(keys):
        c = keyIndex.get(k)
        if c is None:
            c = keyIndex[k] = len(keyClasses)
            keyClasses.append([])
        keyClasses[c].append(j)
        keyOf.append(c)

    classKeys = [keys[members[0]] for members in keyClasses]
    queryClasses = {}
    for i, q in enumerate(queries):
        queryClasses.setdefault(q, []).append(i)

    outputs = [None] * N
    ties    = [None] * N

    if head.mask == Mask.unmasked:

        classSums = []
        for members in keyClasses:
            acc = {}
            for j in members:
                _accumulate(acc, values[j])
            classSums.append(acc)

        for q, positions in queryClasses.items():
            best, bestClasses = None, []
            for c, k in enumerate(classKeys):
                score = _Score(_dot(q, k))
                order = 1 if best is None else score.cmp(best)
                if order > 0:
                    best, bestClasses = score, [c]
                elif order == 0:
                    bestClasses.append(c)

            acc, count = {}, 0
            for c in bestClasses:
                _accumulate(acc, classSums[c].items())
                count += len(keyClasses[c])
            out = _average(acc, count)
            for i in positions:
                outputs[i] = out
                ties[i] = (tuple(bestClasses), None)

    else:
        for q, positions in queryClasses.items():
            wanted = set(positions)
            scores = {}
            best, bestClasses, acc, count = None, [], {}, 0
            last = max(positions)

            for j in range(last + 1):
                c = keyOf[j]
                score = scores.get(c)
                if score is None:
                    score = scores[c] = _Score(_dot(q, classKeys[c]))

                order = 1 if best is None else score.cmp(best)
                if order > 0:
                    best, bestClasses, acc, count = score, [c], {}, 0
                if order >= 0:
                    if c not in bestClasses:
                        bestClasses.append(c)
                    _accumulate(acc, values[j])
                    count += 1

                if j in wanted:
                    outputs[j] = _average(acc, count)
                    ties[j] = (tuple(bestClasses), j)

    return outputs, HeadRecord(head.mask, keyClasses, ties)


def _average(acc: dict, count: int):
    factor = Fraction(1, count)
    return tuple(sorted((d, x.scale(factor)) for d, x in acc.items() if x))
