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

from Compiler.Assignment import assignment_index, assignment_tuple
from Compiler.Compile import compile, DEPTH_SLOPE, DEPTH_OFFSET
from IR.Depth import parallel_depth
from IR.Transformer import Mask
from Logic.Evaluate import eval_formula, words
from Logic.Formula import formula_metrics
from Logic.Parser import parse_formula
from Simulator.Runner import run
from Utils.Errorhandling import DomainError, ValidationError, isAhatError


def decide(t, w):
    return bool(run(t, w, trace=False).decision)


def agrees(f, max_n, min_n=0):
    t = compile(f, ("a", "b")).transformer
    for w in words("ab", max_n):
        if len(w) >= min_n:
            assert decide(t, w) == eval_formula(f, w), "".join(w)


def test_exists_a():

    f = parse_formula("E i. Qa(i)")
    t = compile(f, ("a", "b")).transformer
    assert decide(t, "ba")
    assert not decide(t, "bb")
    assert all(h.mask == Mask.unmasked for h in t.heads())
    assert t.padding.degree == 1


def test_assignment_order():
    for n in (1, 2, 3):
        for v in range(1, n ** 2 + 1):
            assert assignment_index(assignment_tuple(v, n, 2), n) == v


def test_constant_sentence_is_promoted():

    f = parse_formula("1 = n")
    agrees(f, 3)
    with pytest.raises(DomainError) as info:
        compile(f, ("a", "b"), promote_constant=False)
    assert isAhatError(info.value, reason="constant_sentence")


def test_rejections():

    with pytest.raises(DomainError):
        compile(parse_formula("Qa(i)"), ("a", "b"))
    with pytest.raises(DomainError):
        compile(parse_formula("E i. bit(n, i)"), ("a", "b"))
    with pytest.raises(DomainError):
        compile(parse_formula("E i. Qa(i)"), ("a", "□"))


def test_gadgets_fail_strict_validation():
    with pytest.raises(ValidationError):
        compile(parse_formula("E i. Qa(i)"), ("a", "b"), strict_sublayers=True)


def test_scratch_offset_keeps_decisions():

    f = parse_formula("A i. E j. Qa(j) & i <= j")
    shifted = compile(f, ("a", "b"), scratch_offset=5).transformer
    plain = compile(f, ("a", "b")).transformer
    assert shifted.width > plain.width
    for w in words("ab", 3):
        assert decide(shifted, w) == decide(plain, w)


def test_plan_names_every_channel():

    artifact = compile(parse_formula("E i. Qa(i) & i = n"), ("a", "b"))
    assert len(artifact.transformer.channels) == artifact.transformer.width
    assert "decision" in artifact.transformer.channels
    assert artifact.metrics == (1, 3)


def test_corpus_equivalence(formulas):
    # reduced bounds, the full sweep is marked slow

    for text, f in formulas:
        k = formula_metrics(f)[0]
        agrees(f, 3 if k <= 2 else 2)


@pytest.mark.slow
def test_corpus_equivalence_full(formulas):

    for text, f in formulas:
        k = formula_metrics(f)[0]
        agrees(f, 6 if k <= 2 else 4, min_n=1)


def test_depth_is_linear_in_nesting(formulas):

    for text, f in formulas:
        t = compile(f, ("a", "b")).transformer
        assert parallel_depth(t) <= DEPTH_SLOPE * formula_metrics(f)[1] + DEPTH_OFFSET, text


def boundaryWords(n):
    # no witness, one witness and all but one witness at every position, all witnesses

    yield "b" * n
    yield "a" * n
    for p in range(n):
        yield "b" * p + "a" + "b" * (n - p - 1)
        yield "a" * p + "b" + "a" * (n - p - 1)


@pytest.mark.parametrize("text", ["E i. Qa(i)", "A i. Qa(i)", "E i. Qb(i) & i = n"])
@pytest.mark.parametrize("n", [1, 2, 3, pytest.param(4, marks=pytest.mark.slow), pytest.param(5, marks=pytest.mark.slow),
                               pytest.param(6, marks=pytest.mark.slow)])
def test_quantifier_thresholds_on_boundary_words(text, n):

    f = parse_formula(text)
    t = compile(f, ("a", "b")).transformer
    for w in boundaryWords(n):
        assert decide(t, w) == eval_formula(f, w), w


def pairMajority(w):
    # strict majority of the n² pairs (i, j) with w_i = 1
    pairs = [(i, j) for i in range(len(w)) for j in range(len(w))]
    return 2 * sum(1 for i, j in pairs if w[i] == "1") > len(pairs)


@pytest.mark.parametrize("max_n", [3, pytest.param(6, marks=pytest.mark.slow)])
def test_majority_of_ones(max_n):

    f = parse_formula("M2(i, j). Q1(i)")
    t = compile(f, ("0", "1")).transformer
    for w in words("01", max_n):
        if w:
            w = "".join(w)
            assert decide(t, w) == pairMajority(w) == eval_formula(f, w), w
