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

from Compiler.Compile import compile
from Fuzz.Generate import gen_mask_ir
from IR.Matrix import Matrix
from IR.Transformer import Attention, Head, Loop, Mask, PositionEncoding
from Logic.Evaluate import words
from Logic.Parser import parse_formula
from Masking.Convert import to_causal, convert_report, unmasked_layers, flatten, normExtension, isSquare
from Masking.Dominance import choose_dominance_constant, score_bound
from Simulator.Runner import run
from Utils.Errorhandling import DomainError, isAhatError

# (seed, depth, mixed) of the mask corpus
MaskCorpus = [(1, 1, False), (2, 1, False), (3, 2, False), (4, 2, False), (5, 2, True), (6, 3, False),
              (7, 3, True), (8, 3, False), (9, 4, False), (10, 4, True)]


def lastBlock(t, converted, w, trace=False):
    # residuals of the last block of the converted run, on the original channels

    result = run(converted, w, trace=trace, strict_norms=False)
    size = 1 + len(w) + t.padding.count(len(w))
    return [tuple(h[:t.width]) for h in result.residuals[-size:]], result


def test_norm_extension():

    assert normExtension(Fraction(4)) == (2, 10)
    factor, ones = normExtension(Fraction(1), norm=1)
    assert (factor * factor - 1) * 1 - 1 == ones
    assert isSquare(Fraction(9, 4)) and not isSquare(Fraction(2))


def test_dominance_exceeds_score_range():

    t = gen_mask_ir(3, 2)
    bound = max(score_bound(h) for h in t.heads())
    assert choose_dominance_constant(t) > 2 * bound
    assert choose_dominance_constant(t) == 2 * (bound + 1)


def diagonalHead(scale, dimension=4):
    identity = Matrix(dimension, dimension, {(d, d): Fraction(1) for d in range(dimension)})
    query = Matrix(dimension, dimension, {(d, d): Fraction(scale) for d in range(dimension)})
    return Head(query, identity, identity)


def test_score_bound_examples():

    assert score_bound(Head(Matrix(4, 4), Matrix(4, 4), Matrix(4, 4))) == 0
    assert score_bound(diagonalHead(1)) == 4
    assert score_bound(diagonalHead(10)) == 40
    assert score_bound(diagonalHead(Fraction(-1, 2))) == 2


@pytest.mark.parametrize("seed, depth, mixed", MaskCorpus)
def test_converted_residuals_match(seed, depth, mixed):

    t = gen_mask_ir(seed, depth, mixed)
    converted = to_causal(t)
    assert converted.isCausal()
    assert converted.metadata["blocks"] == unmasked_layers(t)

    for w in words("ab", 2 if depth > 2 else 3):
        if not w:
            continue
        original = [tuple(h) for h in run(t, w, trace=False).residuals]
        actual, _ = lastBlock(t, converted, w)
        assert actual == original, "".join(w)


@pytest.mark.parametrize("seed, depth, mixed", MaskCorpus[2:6])
def test_tie_sets_stay_in_one_block(seed, depth, mixed):

    t = gen_mask_ir(seed, depth, mixed)
    converted = to_causal(t)
    names = {s.name for s in t.attentionLayers()}

    w = "abb"
    size = 1 + len(w) + t.padding.count(len(w))
    _, result = lastBlock(t, converted, w, trace="ties")
    for record in result.trace.attentionRecords():
        if record.name not in names:
            continue
        for head in record.heads:
            for i in range(len(head.ties)):
                assert len({p // size for p in head.tieSet(i)}) == 1, (record.name, i)


def test_padding_report():

    t = gen_mask_ir(6, 3)
    converted = to_causal(t)
    L = unmasked_layers(t)
    report = convert_report(t, converted, lengths=range(1, 4))
    assert report["blocks"] == L
    for entry in report["lengths"]:
        assert entry["added_padding"] == L * entry["original_length"]


def setupLength(t):
    # prefix, position, length, two hashes, block, offset, index and copy, two sublayers per block indicator
    encoded = t.position_encoding in (PositionEncoding.inverse_index, PositionEncoding.index_over_length)
    return 9 + 2 * (unmasked_layers(t) + 1) + (1 if encoded else 0)


@pytest.mark.parametrize("seed, depth, mixed", MaskCorpus)
def test_converted_depth_is_original_plus_setup(seed, depth, mixed):

    t = gen_mask_ir(seed, depth, mixed)
    converted = to_causal(t)
    assert converted.metadata["setup"] == setupLength(t)
    assert len(converted.blocks.A) == len(flatten(t)) + setupLength(t)
    assert not converted.blocks.B and not converted.blocks.C


def test_compiled_formula_setup_includes_position_encoding():

    t = compile(parse_formula("E i. Qa(i)"), ("a", "b")).transformer
    assert t.position_encoding == PositionEncoding.inverse_index
    converted = to_causal(t)
    assert len(converted.blocks.A) == len(flatten(t)) + setupLength(t)


def test_padding_counts_unmasked_layers_only():
    # causal layers and feed-forwards add no block

    t = gen_mask_ir(10, 4, True, padding=True)
    attentions = [s for s in flatten(t) if isinstance(s, Attention)]
    L = unmasked_layers(t)
    assert (L, len(attentions), len(flatten(t))) == (2, 4, 8)

    converted = to_causal(t)
    for n in range(5):
        original = 1 + n + t.padding.count(n)
        assert converted.padding.count(n) - t.padding.count(n) == L * original


def test_padded_source_is_converted():

    t = gen_mask_ir(4, 2, padding=True)
    converted = to_causal(t)
    for w in ("a", "ba"):
        original = [tuple(h) for h in run(t, w, trace=False).residuals]
        actual, _ = lastBlock(t, converted, w)
        assert actual == original


def test_compiled_formula_converts():

    f = parse_formula("E i. Qa(i)")
    t = compile(f, ("a", "b")).transformer
    converted = to_causal(t)
    for w in ("a", "b", "ab", "bb"):
        assert run(converted, w, trace=False, strict_norms=False).decision == run(t, w, trace=False).decision


def test_causal_input_is_returned_unchanged():

    t = gen_mask_ir(1, 1)
    converted = to_causal(t)
    assert to_causal(converted) is converted


def test_looped_transformer_is_rejected():

    t = gen_mask_ir(1, 1).evolve(loop=Loop(1, 1))
    with pytest.raises(DomainError) as info:
        to_causal(t)
    assert isAhatError(info.value, source="convert", reason="looped")


def test_undeclared_read_norm_is_rejected():

    t = gen_mask_ir(1, 1)
    s = t.blocks.A[0]
    stripped = Attention(s.prenorm, s.heads, s.output, None, s.name)
    t = t.evolve(blocks=t.blocks.__class__(A=(stripped,) + t.blocks.A[1:]))
    with pytest.raises(DomainError) as info:
        to_causal(t)
    assert isAhatError(info.value, reason="undeclared_read_norm")
