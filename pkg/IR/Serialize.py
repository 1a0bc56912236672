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

import json, sys
from fractions import Fraction

import msgpack

from IR.Matrix import Matrix
from IR.Transformer import (TransformerIR, Blocks, Attention, FeedForward, Gadget, Head, Loop, Padding,
                            Readout, AffineTerm, AffineSource, Mask, PositionEncoding, GadgetKind, DecisionRule)
from Utils.Errorhandling import ParseError

Schema = "ahat-ir/1"


def _q(value):
    return str(Fraction(value))


def _unq(text, path):
    try:
        return Fraction(text)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ParseError("ir", "malformed_rational", f"invalid rational '{text}'", path)


def _form(pairs):
    return [[c, _q(v)] for c, v in pairs]


def _unform(pairs, path):
    return tuple((int(c), _unq(v, path)) for c, v in pairs)


# --------------------------------------------------------------------------------------------------
# writing

def _matrix(m: Matrix):
    return {"shape": [m.rows, m.cols], "entries": [[i, j, _q(v)] for (i, j), v in m.entries()]}


def _source(s: AffineSource):
    doc = {"kind": s.kind}
    if s.form:
        doc["form"] = _form(s.form)
    if s.denominator:
        doc["denominator"] = _form(s.denominator)
    if s.kind == "hash":
        doc["channel"] = s.channel
    if s.kind == "power":
        doc["exponent"] = s.exponent
    return doc


def _sublayer(s):

    if isinstance(s, Attention):
        doc = {"type": "attention",
               "prenorm": _matrix(s.prenorm),
               "heads": [{"query": _matrix(h.query), "key": _matrix(h.key), "value": _matrix(h.value),
                          "mask": h.mask.value} for h in s.heads],
               "output": _matrix(s.output)}
        if s.read_norm is not None:
            doc["read_norm"] = _q(s.read_norm)

    elif isinstance(s, FeedForward):
        doc = {"type": "feedforward", "prenorm": _matrix(s.prenorm), "up": _matrix(s.up), "down": _matrix(s.down)}

    else:
        doc = {"type": "gadget", "kind": s.kind.value, "inputs": list(s.inputs), "outputs": list(s.outputs),
               "idealized": s.idealized}
        if s.terms:
            doc["terms"] = [{"output": t.output, "coefficient": _q(t.coefficient), "source": _source(t.source),
                             **({"gate": t.gate} if t.gate is not None else {})} for t in s.terms]
        if s.constants:
            doc["constants"] = _form(s.constants)

    if s.name:
        doc["name"] = s.name
    return doc


def to_document(t: TransformerIR):

    doc = {
        "schema": Schema,
        "alphabet": list(t.alphabet),
        "width": t.width,
        "embedding": {token: _form(t.embedding[token]) for token in t.alphabet if token in t.embedding},
        "position_encoding": t.position_encoding.value,
        "blocks": {name: [_sublayer(s) for s in getattr(t.blocks, name)] for name in ("A", "B", "C")},
        "loop": {"exponent": t.loop.exponent, "coefficient": t.loop.coefficient},
        "padding": {"degree": t.padding.degree, "coefficient": t.padding.coefficient,
                    "extra": [list(e) for e in t.padding.extra]},
        "readout": {"rule": t.readout.rule.value, "vector": _form(t.readout.vector),
                    "logits": [list(p) for p in t.readout.logits]},
    }
    if t.position_channel is not None:
        doc["position_channel"] = t.position_channel
    if t.channels:
        doc["channels"] = list(t.channels)
    if t.metadata:
        doc["metadata"] = t.metadata
    if t.max_length is not None:
        doc["max_length"] = t.max_length

    return doc


def serialize(t: TransformerIR):
    return json.dumps(to_document(t), indent=1, ensure_ascii=False)


def serialize_binary(t: TransformerIR):
    return msgpack.packb(to_document(t), use_bin_type=True)


# --------------------------------------------------------------------------------------------------
# reading

def _unmatrix(doc, path):
    try:
        rows, cols = doc["shape"]
        return Matrix(int(rows), int(cols), {(int(i), int(j)): _unq(v, path) for i, j, v in doc["entries"]})
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError("ir", "malformed_matrix", f"invalid matrix: {e}", path)


def _unsource(doc, path):
    return AffineSource(kind        = doc["kind"],
                        form        = _unform(doc.get("form", ()), path),
                        denominator = _unform(doc.get("denominator", ()), path),
                        channel     = int(doc.get("channel", -1)),
                        exponent    = int(doc.get("exponent", 1)))


def _unsublayer(doc, path):

    kind = doc.get("type")
    name = doc.get("name", "")

    if kind == "attention":
        heads = tuple(Head(query = _unmatrix(h["query"], f"{path}.heads[{i}].query"),
                           key   = _unmatrix(h["key"], f"{path}.heads[{i}].key"),
                           value = _unmatrix(h["value"], f"{path}.heads[{i}].value"),
                           mask  = Mask(h.get("mask", "unmasked")))
                      for i, h in enumerate(doc["heads"]))
        norm = _unq(doc["read_norm"], path) if "read_norm" in doc else None
        return Attention(_unmatrix(doc["prenorm"], f"{path}.prenorm"), heads,
                         _unmatrix(doc["output"], f"{path}.output"), norm, name)

    if kind == "feedforward":
        return FeedForward(_unmatrix(doc["prenorm"], f"{path}.prenorm"), _unmatrix(doc["up"], f"{path}.up"),
                           _unmatrix(doc["down"], f"{path}.down"), name)

    if kind == "gadget":
        terms = tuple(AffineTerm(output      = int(t["output"]),
                                 coefficient = _unq(t["coefficient"], path),
                                 source      = _unsource(t["source"], path),
                                 gate        = t.get("gate"))
                      for t in doc.get("terms", ()))
        return Gadget(kind      = GadgetKind(doc["kind"]),
                      inputs    = tuple(int(c) for c in doc["inputs"]),
                      outputs   = tuple(int(c) for c in doc["outputs"]),
                      terms     = terms,
                      constants = _unform(doc.get("constants", ()), path),
                      idealized = bool(doc.get("idealized", True)),
                      name      = name)

    raise ParseError("ir", "unknown_sublayer", f"unknown sublayer type '{kind}'", path)


def from_document(doc):

    if not isinstance(doc, dict) or doc.get("schema") != Schema:
        raise ParseError("ir", "schema_mismatch", f"document is not an {Schema} transformer")

    try:
        blocks = Blocks(*[tuple(_unsublayer(s, f"blocks.{name}[{i}]") for i, s in enumerate(doc["blocks"].get(name, ())))
                          for name in ("A", "B", "C")])

        readout = doc["readout"]
        padding = doc["padding"]
        return TransformerIR(
            alphabet          = tuple(doc["alphabet"]),
            width             = int(doc["width"]),
            embedding         = {token: _unform(vec, f"embedding.{token}") for token, vec in doc["embedding"].items()},
            blocks            = blocks,
            position_encoding = PositionEncoding(doc["position_encoding"]),
            position_channel  = doc.get("position_channel"),
            loop              = Loop(int(doc["loop"]["exponent"]), int(doc["loop"]["coefficient"])),
            padding           = Padding(int(padding["degree"]), int(padding["coefficient"]),
                                        tuple((int(c), int(k)) for c, k in padding.get("extra", ()))),
            readout           = Readout(DecisionRule(readout["rule"]), _unform(readout.get("vector", ()), "readout"),
                                        tuple((str(t), int(c)) for t, c in readout.get("logits", ()))),
            channels          = tuple(doc.get("channels", ())),
            metadata          = dict(doc.get("metadata", {})),
            max_length        = doc.get("max_length"))

    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError("ir", "malformed_document", f"malformed transformer document: {e}")


def deserialize(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError("ir", "malformed_json", f"invalid IR text: {e.msg}", f"line {e.lineno}")
    return from_document(doc)


def deserialize_binary(data: bytes):
    try:
        doc = msgpack.unpackb(data, raw=False, strict_map_key=False)
    except (msgpack.UnpackException, ValueError) as e:
        raise ParseError("ir", "malformed_binary", f"invalid IR binary: {e}")
    return from_document(doc)


# --------------------------------------------------------------------------------------------------
# files, "-" is the standard stream

def load(path: str):

    if path == "-":
        return deserialize(sys.stdin.read())

    if path.endswith(".irb"):
        with open(path, "rb") as f:
            return deserialize_binary(f.read())

    with open(path, "r", encoding="utf-8") as f:
        return deserialize(f.read())


def dump(t: TransformerIR, path: str):

    if path == "-":
        sys.stdout.write(serialize(t) + "\n")
        return

    if path.endswith(".irb"):
        with open(path, "wb") as f:
            f.write(serialize_binary(t))
        return

    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize(t) + "\n")
