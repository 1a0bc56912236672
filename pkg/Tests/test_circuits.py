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

import os
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from Circuits import (parse_circuit, serialize_circuit, eval_circuit, eval_outputs, gate_values, gate_depths, depth, size,
                      is_wide_witness, compose_serial, compose_parallel, compose_recurrent, output_last,
                      build_circuit_evaluator, encode_instance, evaluate_instance, gate_positions, bits)
from Fuzz.Generate import gen_circuit, case_seeds
from IR.Depth import unroll_depth
from Simulator.Runner import run
from Utils.Errorhandling import DomainError, ParseError, isAhatError, ErrorClass


def assignments(arity):
    return ["".join(map(str, x)) for x in product((0, 1), repeat=arity)]


@pytest.fixture(scope="module")
def evaluator():
    return build_circuit_evaluator()


def test_appendix_circuits_agree(appendix_circuits):

    first, second = appendix_circuits
    assert first.arity == second.arity == 3
    for x in assignments(3):
        x1, x2, x3 = (int(b) for b in x)
        expected = int(x1 + (x2 | x3) + (1 - x3) >= 2)
        assert eval_circuit(first, x) == expected
        assert eval_circuit(second, x) == expected


def test_default_output_is_last_sink(corpus_circuit):

    first = corpus_circuit("appendix_first")
    assert first.output == 4
    assert depth(first) == 2
    assert size(first) == 6


def test_output_marker():

    c = parse_circuit("X X AND &1 &11 OR &1 &11 OUT 11")
    assert c.outputs == (3, 4)
    assert eval_outputs(c, "10") == (0, 1)
    assert serialize_circuit(c) == "X X AND &1 &11 OR &1 &11 OUT 11"


def test_majority_ties_are_true():

    c = parse_circuit("X X MAJ &1 &11")
    assert [eval_circuit(c, x) for x in assignments(2)] == [0, 1, 1, 1]


@pytest.mark.parametrize("text, reason", [
    ("X AND &11",            "cycle"),
    ("X AND &111",           "dangling_pointer"),
    ("X NOT &1 &1",          "arity"),
    ("X XOR &1",             "lexical"),
    ("&1 X",                 "syntax"),
    ("",                     "empty"),
])
def test_parse_errors(text, reason):

    with pytest.raises(ParseError) as e:
        parse_circuit(text)
    assert isAhatError(e.value, ErrorClass.syntax, "circuit", reason)


@pytest.mark.parametrize("name", ["appendix_first", "appendix_second", "maj3", "xor"])
def test_serialization_round_trip(corpus_dir, name):

    with open(os.path.join(corpus_dir, "circuits", f"{name}.ckt"), encoding="utf-8") as f:
        text = f.read().strip()
    assert serialize_circuit(parse_circuit(text)) == text


def test_xor_corpus_circuit(corpus_circuit):

    c = corpus_circuit("xor")
    assert [eval_circuit(c, x) for x in assignments(2)] == [0, 1, 1, 0]


def test_output_last_keeps_function(appendix_circuits):

    first = appendix_circuits[0]
    moved = output_last(first)
    assert moved.output == len(moved.gates)
    for x in assignments(3):
        assert eval_circuit(moved, x) == eval_circuit(first, x)


def test_bit_word_and_arity_errors(appendix_circuits):

    with pytest.raises(DomainError):
        eval_circuit(appendix_circuits[0], "10a")
    with pytest.raises(DomainError):
        eval_circuit(appendix_circuits[0], "10")


def test_wide_witness(appendix_circuits):

    first = appendix_circuits[0]
    assert is_wide_witness(first, 4, 1, 1)
    assert not is_wide_witness(first, 3, 1, 1)
    assert not is_wide_witness(first, 16, 1, 1)
    with pytest.raises(DomainError):
        is_wide_witness(first, 1, 1, 1)


# --------------------------------------------------------------------------------------------------
# composition

def test_serial_composition(corpus_circuit):

    xor, negate = corpus_circuit("xor"), parse_circuit("X NOT &1")
    composed = compose_serial(xor, negate)
    assert composed.arity == 2
    for x in assignments(2):
        assert eval_circuit(composed, x) == 1 - eval_circuit(xor, x)


def test_parallel_composition(corpus_circuit):

    maj3 = corpus_circuit("maj3")
    conj = parse_circuit("X X X AND &1 &11 &111")
    composed = compose_parallel(maj3, conj)
    assert composed.arity == 3
    for x in assignments(3):
        assert eval_outputs(composed, x) == (eval_circuit(maj3, x), eval_circuit(conj, x))
    assert serialize_circuit(composed).endswith("OUT 11")


def test_recurrent_composition():

    swap = parse_circuit("X X AND &11 AND &1 OUT 11")
    twice = compose_recurrent(swap, 2)
    thrice = compose_recurrent(swap, 3)
    for x in assignments(2):
        assert eval_outputs(twice, x) == tuple(int(b) for b in x)
        assert eval_outputs(thrice, x) == tuple(int(b) for b in reversed(x))

    with pytest.raises(DomainError):
        compose_recurrent(parse_circuit("X X AND &1 &11"), 2)
    with pytest.raises(DomainError):
        compose_recurrent(swap, 0)


def sideBySide(seed, arity):
    # arity random single output circuits on shared inputs

    circuits = [gen_circuit(seed + k, max_depth=3, max_size=8, arity=arity) for k in range(arity)]
    result = circuits[0]
    for c in circuits[1:]:
        result = compose_parallel(result, c)
    return result


@pytest.mark.parametrize("arity", [1, 2, 3, 4])
def test_composition_laws(arity):

    for seed in range(3):
        f = sideBySide(100 * seed, arity)
        g = gen_circuit(100 * seed + 50, max_depth=3, max_size=8, arity=arity)
        assert len(f.outputs) == arity

        serial, parallel = compose_serial(f, g), compose_parallel(g, f)
        for x in assignments(arity):
            assert eval_outputs(serial, x) == eval_outputs(g, eval_outputs(f, x))
            assert eval_outputs(parallel, x) == eval_outputs(g, x) + eval_outputs(f, x)

        for r in range(1, 5):
            repeated = compose_recurrent(f, r)
            for x in assignments(arity):
                expected = bits(x)
                for _ in range(r):
                    expected = eval_outputs(f, expected)
                assert eval_outputs(repeated, x) == expected, (seed, r, x)


# --------------------------------------------------------------------------------------------------
# looped evaluator

def test_encoding(corpus_circuit):

    maj3 = corpus_circuit("maj3")
    assert encode_instance(maj3, "101") == ("1", "0", "1", "X", "X", "X", "MAJ", "&", "1", "&", "1", "1",
                                            "&", "1", "1", "1")
    assert gate_positions(maj3, "101") == [5, 6, 7, 8]


@pytest.mark.parametrize("x", assignments(2))
def test_evaluator_on_xor(evaluator, corpus_circuit, x):

    c = corpus_circuit("xor")
    decision, _ = run(evaluator, encode_instance(c, x), trace=False)
    assert decision == eval_circuit(c, x)


def test_evaluator_on_appendix(evaluator, appendix_circuits):

    second = appendix_circuits[1]
    for x in ("110", "001"):
        decision, _ = run(evaluator, encode_instance(second, x), trace=False)
        assert decision == eval_circuit(second, x)


@pytest.mark.slow
@pytest.mark.parametrize("x", assignments(3))
def test_evaluator_on_appendix_full(evaluator, appendix_circuits, x):

    for c in appendix_circuits:
        decision, _ = run(evaluator, encode_instance(c, x), trace=False)
        assert decision == eval_circuit(c, x)


def assertGatesResolveAfterTheirDepth(evaluator, c, x):
    # known is set exactly from iteration depth+1 on, together with the gate's truth value

    c = output_last(c)
    depths = gate_depths(c)
    values = gate_values(c, x)
    positions = gate_positions(c, x)
    known, truth = evaluator.channelIndex("known"), evaluator.channelIndex("truth")

    result = run(evaluator, encode_instance(c, x), trace="iterations")
    snapshots = result.trace.iterationSnapshots()
    assert len(snapshots) == result.iterations + 1

    for gate, p in enumerate(positions, start=1):
        for r, residuals in enumerate(snapshots):
            h = residuals[p - 1]
            if r >= depths[gate] + 1:
                assert h[known] == 1
                assert h[truth] == (1 if values[gate] else -1)
            else:
                assert h[known] == -1


def test_gates_resolve_one_iteration_after_their_depth(evaluator, corpus_circuit):
    assertGatesResolveAfterTheirDepth(evaluator, corpus_circuit("xor"), "10")


@pytest.mark.slow
@pytest.mark.parametrize("seed", case_seeds(5, 200)[:25])
def test_generated_gates_resolve_after_their_depth(evaluator, seed):

    c = gen_circuit(seed, max_depth=5, max_size=40, arity=6)
    x = format(seed % 64, "06b")
    assert depth(c) + 1 <= unroll_depth(evaluator, len(encode_instance(c, x)) + 2)
    assertGatesResolveAfterTheirDepth(evaluator, c, x)


def test_checked_evaluation_agrees(evaluator, corpus_circuit):

    c = corpus_circuit("xor")
    for x in assignments(2):
        assert evaluate_instance(evaluator, c, x) == eval_circuit(c, x)


def test_short_loop_leaves_output_unresolved(evaluator, corpus_circuit):

    c = corpus_circuit("xor")
    assert depth(c) == 3
    with pytest.raises(DomainError) as exc:
        evaluate_instance(evaluator, c, "10", iterations=depth(c))
    assert exc.value.reason == "unresolved_gate"
    assert evaluate_instance(evaluator, c, "10", iterations=depth(c) + 1) == 1


def not_chain(length):
    # X followed by length NOT gates, each negating the gate before it
    return parse_circuit("X " + " ".join("NOT &" + "1" * k for k in range(1, length + 1)))


@pytest.mark.slow
def test_deep_chain_outgrows_the_default_loop(evaluator):

    c = not_chain(17)
    assert depth(c) == 17
    assert eval_circuit(c, "0") == 1
    assert 2**7 < len(encode_instance(c, "0")) + 2 <= 2**8
    with pytest.raises(DomainError) as exc:
        evaluate_instance(evaluator, c, "0")
    assert exc.value.reason == "unresolved_gate"


# --------------------------------------------------------------------------------------------------
# generator

def test_generator_is_deterministic():
    assert gen_circuit(7) == gen_circuit(7)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=4))
def test_generated_circuits_are_valid(seed, max_depth):

    c = gen_circuit(seed, max_depth=max_depth, max_size=12, arity=3)
    assert c.arity == 3
    assert c.output == len(c.gates)
    assert depth(c) <= max_depth
    assert parse_circuit(serialize_circuit(c)) == c
