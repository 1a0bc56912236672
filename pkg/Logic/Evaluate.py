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

import itertools

from Logic.Formula import One, N, Var, QSigma, Eq, Leq, Geq, Bit, And, Or, Not, Exists, Forall, Maj2, free_variables
from Utils.Errorhandling import DomainError


def _index(i, n, v):

    if isinstance(i, One):
        return 1
    if isinstance(i, N):
        return n
    if i.name not in v:
        raise DomainError("logic", "unbound_variable", f"variable '{i.name}' is not bound")
    return v[i.name]


def _eval(f, w, n, v):

    if isinstance(f, QSigma):
        m = _index(f.index, n, v)
        return 1 <= m <= n and w[m - 1] == f.token
    if isinstance(f, Eq):
        return _index(f.left, n, v) == _index(f.right, n, v)
    if isinstance(f, Leq):
        return _index(f.left, n, v) <= _index(f.right, n, v)
    if isinstance(f, Geq):
        return _index(f.left, n, v) >= _index(f.right, n, v)
    if isinstance(f, Bit):
        i, j = _index(f.number, n, v), _index(f.position, n, v)
        return j >= 1 and bool((i >> (j - 1)) & 1)

    if isinstance(f, And):
        return _eval(f.left, w, n, v) and _eval(f.right, w, n, v)
    if isinstance(f, Or):
        return _eval(f.left, w, n, v) or _eval(f.right, w, n, v)
    if isinstance(f, Not):
        return not _eval(f.body, w, n, v)

    if isinstance(f, Exists):
        return any(_eval(f.body, w, n, {**v, f.var: m}) for m in range(1, n + 1))
    if isinstance(f, Forall):
        return all(_eval(f.body, w, n, {**v, f.var: m}) for m in range(1, n + 1))
    if isinstance(f, Maj2):
        #strict majority of the n² pairs
        count = sum(1 for a, b in itertools.product(range(1, n + 1), repeat=2)
                    if _eval(f.body, w, n, {**v, f.first: a, f.second: b}))
        return 2 * count > n * n

    raise TypeError(f"not a formula: {f!r}")


def eval_formula(f, w, v=None):
    ''' Truth value of f on the word w under the assignment v

        w is a string of single character tokens or a sequence of tokens, v maps variable names to
        positions 1..n. Quantifiers over the empty word range over nothing.
    '''
    return bool(_eval(f, tuple(w), len(w), dict(v or {})))


def words(alphabet, max_n):
    # all words up to length max_n, shortest first, in alphabet order
    for n in range(max_n + 1):
        for word in itertools.product(alphabet, repeat=n):
            yield word


def _render(word, alphabet):
    return "".join(word) if all(len(a) == 1 for a in alphabet) else word


def enumerate_language(f, alphabet, max_n):
    ''' All words of length ≤ max_n that satisfy the sentence f, including the empty word

        Words are strings for single character alphabets, token tuples otherwise.
    '''

    unbound = free_variables(f)
    if unbound:
        raise DomainError("logic", "not_a_sentence", f"free variables {sorted(unbound)}")

    return [_render(word, alphabet) for word in words(alphabet, max_n) if eval_formula(f, word)]
