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

from Utils.Errorhandling import DomainError, Out_Of_Range


def assignment_index(values, n: int):
    # mixed radix bijection [1, n]^k -> [1, n^k], v = Σ (v[t]−1)·n^(t−1) + 1

    index = 0
    for t, value in enumerate(values):
        if not 1 <= value <= n:
            raise DomainError("assignment", Out_Of_Range, f"component {t + 1} = {value} outside 1..{n}")
        index += (value - 1) * n ** t
    return index + 1


def assignment_tuple(index: int, n: int, k: int):
    # inverse of assignment_index

    if n < 1 or not 1 <= index <= n ** k:
        raise DomainError("assignment", Out_Of_Range, f"assignment index {index} outside 1..{n}^{k}")

    rest = index - 1
    values = []
    for _ in range(k):
        rest, digit = divmod(rest, n)
        values.append(digit + 1)
    return tuple(values)
