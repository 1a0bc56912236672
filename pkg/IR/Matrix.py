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

from Arithmetic.Radical import RadicalSum
from Utils.Errorhandling import DomainError


class Matrix():
    ''' Sparse matrix with rational entries

        Only nonzero entries are stored. Matrices are immutable once constructed; use a dict of
        entries to build one and the transforming methods (remap, scaled, ...) to derive new ones.
    '''

    __slots__ = ("rows", "cols", "_entries", "_byRow")

    def __init__(self, rows: int, cols: int, entries=None):
        # entries - mapping or iterable of ((row, col), value)

        self.rows = rows
        self.cols = cols

        items = entries.items() if isinstance(entries, dict) else (entries or ())
        collected = {}
        for (i, j), value in items:
            if not (0 <= i < rows and 0 <= j < cols):
                raise DomainError("matrix", "index_out_of_range", f"entry ({i}, {j}) outside shape ({rows}, {cols})")
            value = Fraction(value)
            if value:
                collected[(i, j)] = value

        self._entries = collected
        byRow = {}
        for (i, j), value in sorted(collected.items()):
            byRow.setdefault(i, []).append((j, value))
        self._byRow = {i: tuple(row) for i, row in byRow.items()}

    @classmethod
    def zeros(cls, rows: int, cols: int):
        return cls(rows, cols)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def get(self, i: int, j: int):
        return self._entries.get((i, j), Fraction(0))

    def entries(self):
        # sorted list of ((row, col), value) for all nonzero entries
        return sorted(self._entries.items())

    def row(self, i: int):
        return self._byRow.get(i, ())

    def nonzeroRows(self):
        return sorted(self._byRow)

    def nonzeroCols(self):
        return sorted({j for (_, j) in self._entries})

    def isZero(self):
        return not self._entries

    def maxAbsRowSum(self):
        # the operator norm ‖·‖∞, used for score bounds
        if not self._byRow:
            return Fraction(0)
        return max(sum(abs(v) for _, v in row) for row in self._byRow.values())

    def absSum(self):
        return sum((abs(v) for v in self._entries.values()), Fraction(0))

    def apply(self, vector):
        # dense product with a vector of RadicalSum, returns a list of length rows

        result = [RadicalSum()] * self.rows
        for i, row in self._byRow.items():
            result[i] = _combine(row, vector)
        return result

    def applySparse(self, vector):
        # product restricted to nonzero results, returns dict row -> RadicalSum

        result = {}
        for i, row in self._byRow.items():
            value = _combine(row, vector)
            if value:
                result[i] = value
        return result

    def scaled(self, factor):
        factor = Fraction(factor)
        return Matrix(self.rows, self.cols, {key: value * factor for key, value in self._entries.items()})

    def remap(self, rows: int, cols: int, rowMap=None, colMap=None):
        # moves every entry (i, j) to (rowMap[i], colMap[j]) inside a matrix of the new shape

        entries = {}
        for (i, j), value in self._entries.items():
            ni = rowMap[i] if rowMap is not None else i
            nj = colMap[j] if colMap is not None else j
            entries[(ni, nj)] = entries.get((ni, nj), 0) + value
        return Matrix(rows, cols, entries)

    def extended(self, rows: int, cols: int, extra=None):
        # same entries in a larger shape, plus additional entries
        entries = dict(self._entries)
        for key, value in (extra.items() if isinstance(extra, dict) else (extra or ())):
            entries[key] = entries.get(key, 0) + Fraction(value)
        return Matrix(rows, cols, entries)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.entries())))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, {len(self._entries)} entries)"


def _combine(row, vector):
    # Σ c·v[j] accumulated directly on the canonical terms

    acc = {}
    for j, c in row:
        for radicand, coefficient in vector[j].terms:
            acc[radicand] = acc.get(radicand, 0) + c * coefficient
    return RadicalSum._fromDict(acc)
