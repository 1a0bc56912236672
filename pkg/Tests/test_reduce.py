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

import pytest

from Compiler.Compile import compile
from IR.Transformer import BLANK, Loop
from Logic.Evaluate import eval_formula, words
from Logic.Parser import parse_formula
from Reduce import (REDUCTIONS, reduction, binary_index, bit_width, apply_reduction, membership_R,
                    build_reduction_transformer, reduction_input, stack, StackBounds)
from Simulator.Runner import run
from Utils.Errorhandling import AhatError, DomainError, isAhatError, ErrorClass


@pytest.fixture(scope="module")
def transformers():
    # T_f over {a, b} for words up to length 3
    return {name: build_reduction_transformer(name, "ab", bit_width(f, 3)) for name, f in REDUCTIONS.items()}


def test_apply_reduction():

    assert apply_reduction("identity", "abb") == "abb"
    assert apply_reduction("reverse", "abb") == "bba"
    assert apply_reduction("duplicate", "ab") == "abab"
    assert apply_reduction("reverse", ("a", "b")) == ("b", "a")
    assert apply_reduction("duplicate", "") == ""


def test_unknown_reduction():

    with pytest.raises(DomainError) as e:
        reduction("rotate")
    assert isAhatError(e.value, ErrorClass.domain, "reduce", "unknown_reduction")


def test_binary_index():

    assert str(binary_index(5, 4)) == "0101"
    assert binary_index(5, 4).value == 5
    assert binary_index(0, 1).width == 1
    with pytest.raises(DomainError):
        binary_index(4, 2)
    with pytest.raises(DomainError):
        binary_index(-1, 3)


def test_bit_width():

    assert bit_width(reduction("identity"), 3) == 2
    assert bit_width(reduction("duplicate"), 3) == 3
    assert bit_width(reduction("identity"), 0) == 1


def test_membership():

    assert membership_R("reverse", "abb", "01", "b")
    assert membership_R("reverse", "abb", "11", "a")
    assert not membership_R("reverse", "abb", "11", "b")
    # index 0 and indices past |f(w)| carry the blank
    assert membership_R("identity", "ab", "00", BLANK)
    assert membership_R("duplicate", "ab", "101", BLANK)
    assert membership_R("duplicate", "ab", "100", "b")
    with pytest.raises(DomainError):
        membership_R("identity", "ab", "2", "a")


@pytest.mark.parametrize("name", sorted(REDUCTIONS))
def test_reduction_transformer_is_tokenwise(transformers, name):

    t = transformers[name]
    f, bw = reduction(name), t.metadata["bit_width"]
    for w in words("ab", 2):
        if not w:
            continue
        for i in range(2 ** bw):
            decision, _ = run(t, reduction_input(w, i, bw), trace=False)
            assert decision == f.token(w, i), (w, i)


@pytest.mark.slow
def test_reduction_transformer_on_longer_words(transformers):

    t = transformers["duplicate"]
    f, bw = reduction("duplicate"), t.metadata["bit_width"]
    for w in words("ab", 3):
        if len(w) < 3:
            continue
        for i in range(2 ** bw):
            assert run(t, reduction_input(w, i, bw), trace=False).decision == f.token(w, i)


def test_reduction_transformer_rejects():

    with pytest.raises(DomainError):
        build_reduction_transformer("identity", "a1", 2)
    with pytest.raises(DomainError):
        build_reduction_transformer("identity", "ab", 0)


# --------------------------------------------------------------------------------------------------
# stacking

StackCases = [
    ("reverse",   "A i. Qa(i) | i = n"),
    ("identity",  "E i. Qb(i)"),
    ("duplicate", "E i. Qa(i) & i = n"),
]


def stacked(name, text, max_n):
    T_f = build_reduction_transformer(name, "ab", bit_width(reduction(name), max_n))
    T_L = compile(parse_formula(text), "ab").transformer
    return stack(T_f, T_L, StackBounds(max_n))


@pytest.mark.parametrize("name, text", StackCases)
def test_stack_decides_on_the_image(name, text):

    t, f = stacked(name, text, 2), parse_formula(text)
    for w in words("ab", 2):
        if not w:
            continue
        decision, _ = run(t, w, trace=False, strict_norms=False)
        assert bool(decision) == eval_formula(f, apply_reduction(name, w)), w


def test_stack_confines_reduction_attention():

    t = stacked("reverse", "E i. Qa(i)", 2)
    w = "ab"
    bw = t.metadata["bit_width"]
    size, blocks = 1 + len(w) + bw, 1 + len(w)

    result = run(t, w, trace="ties", strict_norms=False)
    checked = 0
    for record in result.trace.attentionRecords():
        if not record.name.startswith("f."):
            continue
        for head in record.heads:
            for i in range(blocks * size):
                assert {p // size for p in head.tieSet(i)} == {i // size}, (record.name, i)
                checked += 1
    assert checked


def test_stack_preconditions(transformers):

    T_L = compile(parse_formula("E i. Qa(i)"), "ab").transformer

    # too few index bits for the bound
    with pytest.raises(DomainError) as e:
        stack(transformers["identity"], T_L, StackBounds(4))
    assert e.value.error.endswith("out_of_range")

    with pytest.raises(DomainError):
        stack(T_L, T_L, StackBounds(2))

    looped = T_L.evolve(loop=Loop(1, 1))
    with pytest.raises(AhatError):
        stack(transformers["identity"], looped, StackBounds(2))
