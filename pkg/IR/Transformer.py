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

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple, Union

from IR.Matrix import Matrix

BOS   = "$"
BLANK = "□"


class Mask(Enum):
    causal   = "causal"
    unmasked = "unmasked"


class PositionEncoding(Enum):
    none              = "none"
    inverse_index     = "inverse_index"
    index_over_length = "index_over_length"


class GadgetKind(Enum):
    ln_hash     = "ln_hash"
    quotient    = "quotient"
    remainder   = "remainder"
    hash_equal  = "hash_equal"
    affine_int  = "affine_int"
    bit_extract = "bit_extract"


class DecisionRule(Enum):
    sign   = "sign"
    argmax = "argmax"


# declared (inputs, outputs) arity of the fixed size gadgets
GadgetArity = {
    GadgetKind.ln_hash:     (1, 4),
    GadgetKind.quotient:    (8, 4),
    GadgetKind.remainder:   (8, 4),
    GadgetKind.hash_equal:  (8, 1),
    GadgetKind.bit_extract: (2, 1),
}


@dataclass(frozen=True)
class Head:
    query: Matrix
    key: Matrix
    value: Matrix
    mask: Mask = Mask.unmasked


@dataclass(frozen=True)
class Attention:
    prenorm: Matrix
    heads: Tuple[Head, ...]
    output: Matrix
    read_norm: Optional[Fraction] = None    # declared ‖M·h‖² at every position
    name: str = ""


@dataclass(frozen=True)
class FeedForward:
    prenorm: Matrix
    up: Matrix
    down: Matrix
    name: str = ""


@dataclass(frozen=True)
class AffineSource:
    ''' One source value of an affine_int gadget

        kind "linear": Σ c·h[ch] over form
        kind "ratio":  (Σ form) / (Σ denominator)
        kind "hash":   integer z decoded from the LnHash block starting at channel
        kind "power":  (Σ form) ** exponent
    '''

    kind: str
    form: Tuple[Tuple[int, Fraction], ...] = ()
    denominator: Tuple[Tuple[int, Fraction], ...] = ()
    channel: int = -1
    exponent: int = 1

    def channels(self):
        used = [c for c, _ in self.form] + [c for c, _ in self.denominator]
        if self.kind == "hash":
            used += [self.channel, self.channel + 1, self.channel + 2, self.channel + 3]
        return used


@dataclass(frozen=True)
class AffineTerm:
    output: int
    coefficient: Fraction
    source: AffineSource
    gate: Optional[int] = None      # term active iff h[gate] > 0


@dataclass(frozen=True)
class Gadget:
    kind: GadgetKind
    inputs: Tuple[int, ...]
    outputs: Tuple[int, ...]
    terms: Tuple[AffineTerm, ...] = ()
    constants: Tuple[Tuple[int, Fraction], ...] = ()
    idealized: bool = True
    name: str = ""


Sublayer = Union[Attention, FeedForward, Gadget]


@dataclass(frozen=True)
class Blocks:
    A: Tuple[Sublayer, ...] = ()
    B: Tuple[Sublayer, ...] = ()
    C: Tuple[Sublayer, ...] = ()


@dataclass(frozen=True)
class Loop:
    exponent: int = 0
    coefficient: int = 1


@dataclass(frozen=True)
class Padding:
    degree: int = 0
    coefficient: int = 0
    extra: Tuple[Tuple[int, int], ...] = ()     # further (coefficient, degree) terms

    def terms(self):
        return ((self.coefficient, self.degree),) + tuple(self.extra)

    def count(self, n: int):
        # 0⁰ is taken as 1, which keeps the empty word well defined
        return sum(c * (n ** k if k else 1) for c, k in self.terms())


@dataclass(frozen=True)
class Readout:
    rule: DecisionRule = DecisionRule.sign
    vector: Tuple[Tuple[int, Fraction], ...] = ()   # sign rule: read scalar Σ c·h[ch]
    logits: Tuple[Tuple[str, int], ...] = ()        # argmax rule: token -> channel


@dataclass(frozen=True)
class TransformerIR:
    ''' Complete description of a padded, looped AHAT with masked pre-norm

        The embedding maps every token to a sparse vector (channel -> rational). Tokens missing
        from the embedding embed to zero. A·B^r·C is executed, with r given by the loop schedule.
    '''

    alphabet: Tuple[str, ...]
    width: int
    embedding: dict
    blocks: Blocks
    position_encoding: PositionEncoding = PositionEncoding.none
    position_channel: Optional[int] = None
    loop: Loop = field(default_factory=Loop)
    padding: Padding = field(default_factory=Padding)
    readout: Readout = field(default_factory=Readout)
    channels: Tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)
    max_length: Optional[int] = None

    def inputAlphabet(self):
        return tuple(t for t in self.alphabet if t not in (BOS, BLANK))

    def embed(self, token):
        return self.embedding.get(token, ())

    def sublayers(self):
        return self.blocks.A + self.blocks.B + self.blocks.C

    def attentionLayers(self):
        return [s for s in self.sublayers() if isinstance(s, Attention)]

    def heads(self):
        return [h for s in self.attentionLayers() for h in s.heads]

    def isCausal(self):
        heads = self.heads()
        return bool(heads) and all(h.mask == Mask.causal for h in heads)

    def hasGadgets(self):
        return any(isinstance(s, Gadget) for s in self.sublayers())

    def channelIndex(self, name: str):
        return self.channels.index(name)

    def channelRange(self, prefix: str):
        # all channel indices whose name equals prefix or starts with "prefix["
        return [i for i, name in enumerate(self.channels) if name == prefix or name.startswith(prefix + "[")]

    def evolve(self, **changes):
        return replace(self, **changes)
