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

from IR.Transformer import (TransformerIR, Attention, FeedForward, Gadget, GadgetKind, GadgetArity, PositionEncoding,
                            DecisionRule, BOS, BLANK)
from Utils.Errorhandling import ValidationError


@dataclass(frozen=True)
class ReportEntry:
    level: str          # "error" or "warning"
    path: str
    message: str

    def __str__(self):
        return f"{self.level}: {self.path}: {self.message}"


class _Checker():

    def __init__(self, t: TransformerIR, strictSublayers: bool):
        self.t      = t
        self.m      = t.width
        self.strict = strictSublayers
        self.report = []

    def error(self, path, message):
        self.report.append(ReportEntry("error", path, message))

    def warning(self, path, message):
        self.report.append(ReportEntry("warning", path, message))

    def shape(self, path, matrix, rows, cols):
        if matrix.shape != (rows, cols):
            self.error(path, f"shape {matrix.shape} does not conform, expected ({rows}, {cols})")

    def channel(self, path, c):
        if not isinstance(c, int) or not 0 <= c < self.m:
            self.error(path, f"channel {c} outside width {self.m}")

    def run(self):

        t = self.t
        if self.m <= 0:
            self.error("width", "width must be positive")
            return self.report

        if len(set(t.alphabet)) != len(t.alphabet):
            self.error("alphabet", "duplicate tokens")
        for special in (BOS, BLANK):
            if special not in t.alphabet:
                self.error("alphabet", f"alphabet lacks '{special}'")

        for token, vector in t.embedding.items():
            if token not in t.alphabet:
                self.error(f"embedding.{token}", "token not in alphabet")
            for c, _ in vector:
                self.channel(f"embedding.{token}", c)

        if t.channels and len(t.channels) != self.m:
            self.error("channels", f"{len(t.channels)} channel names for width {self.m}")

        if t.position_encoding != PositionEncoding.none:
            if t.position_channel is None:
                self.error("position_channel", "position encoding needs a channel")
            else:
                self.channel("position_channel", t.position_channel)
            if t.isCausal():
                self.warning("position_encoding", "position encoding redundant for causal-only transformers")

        for name in ("A", "B", "C"):
            for i, s in enumerate(getattr(t.blocks, name)):
                self.sublayer(f"blocks.{name}[{i}]", s)

        if t.loop.exponent < 0 or t.loop.coefficient < 1:
            self.error("loop", "loop needs exponent ≥ 0 and coefficient ≥ 1")
        if t.padding.degree < 0 or any(c < 0 or k < 0 for c, k in t.padding.terms()):
            self.error("padding", "padding terms need nonnegative coefficients and degrees")
        if t.max_length is not None and t.max_length < 0:
            self.error("max_length", "negative length bound")

        self.readout()
        return self.report

    def sublayer(self, path, s):

        if isinstance(s, Attention):
            self.shapeOf(path + ".prenorm", s.prenorm)
            r = s.prenorm.rows
            h = len(s.heads)
            if h == 0:
                self.error(path, "attention without heads")
                return
            if self.m % h:
                self.error(path, "heads must divide width")
                return
            d = self.m // h
            for k, head in enumerate(s.heads):
                self.shape(f"{path}.heads[{k}].query", head.query, d, r)
                self.shape(f"{path}.heads[{k}].key", head.key, d, r)
                self.shape(f"{path}.heads[{k}].value", head.value, d, r)
            self.shape(path + ".output", s.output, self.m, self.m)
            if s.read_norm is not None and s.read_norm <= 0:
                self.error(path + ".read_norm", "declared read norm must be positive")

        elif isinstance(s, FeedForward):
            self.shapeOf(path + ".prenorm", s.prenorm)
            self.shape(path + ".up", s.up, s.up.rows, s.prenorm.rows)
            self.shape(path + ".down", s.down, self.m, s.up.rows)

        elif isinstance(s, Gadget):
            if self.strict:
                self.error(path, f"gadget {s.kind.value} rejected by strict sublayers")
            for c in s.inputs:
                self.channel(path + ".inputs", c)
            for c in s.outputs:
                self.channel(path + ".outputs", c)

            if s.kind in GadgetArity:
                ins, outs = GadgetArity[s.kind]
                if len(s.inputs) != ins or len(s.outputs) != outs:
                    self.error(path, f"{s.kind.value} takes {ins} inputs and {outs} outputs")
            elif s.kind == GadgetKind.affine_int:
                for k, term in enumerate(s.terms):
                    if term.source.kind not in ("linear", "ratio", "hash", "power"):
                        self.error(f"{path}.terms[{k}]", f"unknown source kind '{term.source.kind}'")
                    if term.source.kind == "ratio" and not term.source.denominator:
                        self.error(f"{path}.terms[{k}]", "ratio without denominator")
                    if term.source.kind == "power" and term.source.exponent < 0:
                        self.error(f"{path}.terms[{k}]", "negative exponent")
                    for c in term.source.channels() + ([term.gate] if term.gate is not None else []):
                        self.channel(f"{path}.terms[{k}]", c)
                    if term.output not in s.outputs:
                        self.error(f"{path}.terms[{k}]", "term output not declared")
        else:
            self.error(path, f"unknown sublayer {type(s).__name__}")

    def shapeOf(self, path, prenorm):
        if prenorm.cols != self.m:
            self.error(path, f"pre-norm reads {prenorm.cols} channels, width is {self.m}")

    def readout(self):

        r = self.t.readout
        if r.rule == DecisionRule.sign:
            if not r.vector:
                self.error("readout", "sign readout without read vector")
            for c, _ in r.vector:
                self.channel("readout.vector", c)
        else:
            if not r.logits:
                self.error("readout", "argmax readout without logits")
            for token, c in r.logits:
                if token not in self.t.alphabet:
                    self.error("readout.logits", f"logit token '{token}' not in alphabet")
                self.channel("readout.logits", c)


def validate(t: TransformerIR, strictSublayers: bool=False):
    # returns the list of ReportEntry, empty for a well formed transformer
    return _Checker(t, strictSublayers).run()


def errors(report):
    return [entry for entry in report if entry.level == "error"]


def validateOrRaise(t: TransformerIR, strictSublayers: bool=False):

    report = validate(t, strictSublayers)
    failures = errors(report)
    if failures:
        raise ValidationError("ir", "invalid_transformer", "; ".join(str(e) for e in failures), report)
    return report
