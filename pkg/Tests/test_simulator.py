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

import pytest
from hypothesis import given, strategies as st

from Arithmetic.Radical import RadicalSum, canonicalize
from IR.Transformer import Gadget, GadgetKind, Head, Loop, Mask, Padding, PositionEncoding
from IR.Matrix import Matrix
from Simulator.Attention import ahat_attention
from Simulator.Gadgets import gadget_apply
from Simulator.Prenorm import layer_norm, masked_prenorm, ln_hash, hashDot, decodeHash
from Simulator.Runner import run, start, resume, PaddedInput
from Simulator.Trace import writeTrace, channelSelection
from Utils.Errorhandling import DomainError, isAhatError, Out_Of_Range

from test_ir import averaging

R = RadicalSum


def test_layer_norm_is_exact():

    z, norm2 = layer_norm((R(3), R(4)))
    assert norm2 == 25
    assert z == (R(Fraction(3, 5)), R(Fraction(4, 5)))

    z, norm2 = layer_norm((R(1), R(1)))
    assert z[0] == canonicalize([(2, Fraction(1, 2))])

    assert layer_norm((R(0), R(0))) == ((R(0), R(0)), 0)


def test_masked_prenorm_reads_the_selected_channels():

    M = Matrix(2, 3, {(0, 0): Fraction(1), (1, 2): Fraction(1)})
    z = masked_prenorm((R(3), R(7), R(4)), M)
    assert tuple(z) == (R(Fraction(3, 5)), R(Fraction(4, 5)))


def test_layer_norm_of_radical_norm_is_a_domain_error():
    with pytest.raises(DomainError):
        layer_norm((canonicalize([(2, 1)]) + 1, R(1)))


@given(st.integers(-50, 50), st.integers(-50, 50))
def test_hash_dot_peaks_at_equal_integers(i, j):
    # φ(i)·φ(j) = 1 exactly when i = j
    assert (hashDot(i, j) == 1) == (i == j)
    assert hashDot(i, j) <= 1


@pytest.mark.slow
def test_hash_dot_peaks_exhaustively():

    for i in range(101):
        for j in range(101):
            assert (hashDot(i, j) == 1) == (i == j), (i, j)


def test_hash_dot_is_the_dot_product_of_hashes():

    for i in range(-3, 8):
        for j in range(-3, 8):
            dot = sum((a * b for a, b in zip(ln_hash(i), ln_hash(j))), R(0))
            assert dot == hashDot(i, j)


@given(st.integers(-1000, 1000))
def test_hash_decodes(z):
    assert decodeHash(ln_hash(z)) == z


def test_ties_average_over_the_argmax_set():

    #keys ±1: query +1 attends to both positive positions
    head = Head(Matrix(1, 1, {(0, 0): 1}), Matrix(1, 1, {(0, 0): 1}), Matrix(1, 1, {(0, 0): 1}))
    reads = [(R(1),), (R(-1),), (R(1),)]
    outputs, record = ahat_attention(head, reads)
    assert outputs[0] == ((0, R(1)),)
    assert record.tieSet(1) == [1]
    assert record.tieSet(0) == [0, 2]
    assert record.certified(0)


def test_causal_ties_stop_at_the_query():

    head = Head(Matrix(1, 1), Matrix(1, 1), Matrix(1, 1, {(0, 0): 1}), Mask.causal)
    reads = [(R(1),), (R(-1),), (R(1),), (R(1),)]
    outputs, record = ahat_attention(head, reads)
    assert [record.tieSet(i) for i in range(4)] == [[0], [0, 1], [0, 1, 2], [0, 1, 2, 3]]
    assert outputs[1] == ()
    assert outputs[2] == ((0, R(Fraction(1, 3))),)


def test_padded_input_positions():

    padded = PaddedInput(("a", "b"), 3)
    assert padded.length == 6
    assert padded.physical(2) == 3
    assert padded.logical(1) is None and padded.logical(3) == 2
    with pytest.raises(DomainError) as info:
        padded.physical(3)
    assert isAhatError(info.value, reason=Out_Of_Range)


def test_majority_by_averaging():

    t = averaging()
    assert run(t, "aab").decision == 1
    assert run(t, "abb").decision == 0
    assert run(t, "ab").decision == 0

    result = run(t, "aab")
    assert result.residuals[-1][1] == R(Fraction(1, 4))
    decision, trace = result
    assert decision == 1
    record = trace.attentionRecords()[0]
    assert record.name == "average"
    assert record.heads[0].tieSet(3) == [0, 1, 2, 3]
    assert trace.uncertified() == []


def test_unknown_token():
    with pytest.raises(DomainError) as info:
        run(averaging(), "abc")
    assert isAhatError(info.value, source="simulator", reason="unknown_token")


def test_padding_and_length_bound():

    t = averaging().evolve(padding=Padding(degree=1, coefficient=2), max_length=3)
    result = run(t, "ab")
    assert len(result.residuals) == 1 + 2 + 4
    assert result.padded.tokens[-1] == "□"
    with pytest.raises(DomainError):
        run(t, "abab")


def test_loop_iterations_are_deterministic():

    t = averaging(loop=Loop(1, 1))
    state = start(t, "aab")
    once = resume(t, state, 2)
    twice = resume(t, resume(t, state, 1), 1)
    assert once.residuals == twice.residuals
    assert once.iterations == 2

    result = run(t, "aab", iterations=2)
    assert result.iterations == 2
    assert len(result.trace.iterationSnapshots()) == 3


def test_position_encoding_index_over_length():

    t = averaging().evolve(position_encoding=PositionEncoding.index_over_length, position_channel=1,
                           padding=Padding(degree=0, coefficient=1))
    state = start(t, "ab", trace=False)
    assert [h[1] for h in state.residuals] == [R(Fraction(i, 4)) for i in range(1, 5)]


def test_gadgets():

    h = [R(0)] * 8
    update = gadget_apply(Gadget(GadgetKind.ln_hash, (0,), (1, 2, 3, 4)), [R(5)] + h[1:])
    assert decodeHash(tuple(update[c] for c in (1, 2, 3, 4))) == 5

    block = list(ln_hash(17)) + list(ln_hash(5))
    quotient = gadget_apply(Gadget(GadgetKind.quotient, tuple(range(8)), (8, 9, 10, 11)), block + [R(0)] * 4)
    assert decodeHash(tuple(quotient[c] for c in (8, 9, 10, 11))) == 3
    remainder = gadget_apply(Gadget(GadgetKind.remainder, tuple(range(8)), (8, 9, 10, 11)), block + [R(0)] * 4)
    assert decodeHash(tuple(remainder[c] for c in (8, 9, 10, 11))) == 2

    equal = gadget_apply(Gadget(GadgetKind.hash_equal, tuple(range(8)), (8,)), block + [R(0)])
    assert equal[8] == -1

    for a, j, bit in ((6, 1, -1), (6, 2, 1), (6, 3, 1), (6, 4, -1), (6, 0, -1)):
        update = gadget_apply(Gadget(GadgetKind.bit_extract, (0, 1), (2,)), [R(a), R(j), R(0)])
        assert update[2] == bit


def test_division_by_zero_hash():
    block = list(ln_hash(4)) + list(ln_hash(0))
    with pytest.raises(DomainError):
        gadget_apply(Gadget(GadgetKind.quotient, tuple(range(8)), (8, 9, 10, 11)), block + [R(0)] * 4)


def test_trace_export(tmp_path):

    result = run(averaging(), "ab")
    path = str(tmp_path / "trace.jsonl")
    writeTrace(result.trace, path, channelSelection(result.trace, ["average"]))
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines
    assert all('"letter"' not in line for line in lines)
