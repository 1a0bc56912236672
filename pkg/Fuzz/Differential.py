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

'''
Differential runs of generated instances against their direct evaluators

A case is one generated instance of a kind: a formula compiled to a transformer, a circuit run by
the looped evaluator, an unmasked transformer converted to a causal one, or a reduction stacked
below a compiled formula. The subject (the transformer side) and the oracle (the direct
evaluator) are compared on every input of the case; the first mismatch is shrunk to a smaller
instance and a shorter input that still disagree.
'''

import hashlib
import itertools
import logging
import random
from dataclasses import dataclass, field, replace
from typing import Optional

import msgpack

from Circuits.Circuit import Circuit, Gate, GateKind, serialize_circuit
from Circuits.Evaluate import eval_circuit
from Circuits.Evaluator import build_circuit_evaluator, evaluate_instance
from Compiler.Compile import compile
from Fuzz.Generate import GENERATOR_VERSION, gen_formula, gen_circuit, gen_mask_ir
from IR.Serialize import serialize
from Logic.Evaluate import eval_formula, words
from Logic.Formula import And, Or, Not, Exists, Forall, Maj2, children, is_sentence, serialize_formula
from Masking.Convert import to_causal
from Reduce.Reduction import REDUCTIONS, reduction, bit_width, apply_reduction
from Reduce.Stack import stack, StackBounds
from Reduce.Transformers import build_reduction_transformer
from Simulator.Runner import run
from Utils.Errorhandling import AhatError, UsageError

Kinds = ("formula", "circuit", "mask", "stack")

Defaults = {
    "formula": {"max_k": 2, "max_depth": 3, "alphabet": "ab", "max_n": 3},
    "circuit": {"max_depth": 3, "max_size": 10, "arity": 3},
    "mask":    {"depth": 2, "mixed": False, "max_n": 3},
    "stack":   {"alphabet": "ab", "max_n": 2},
}


def parameters(kind: str, **overrides):
    # default parameters of a kind, updated by the given overrides

    if kind not in Defaults:
        raise UsageError("fuzz", "unknown_kind", f"no fuzz kind '{kind}', expected one of {', '.join(Kinds)}")
    result = dict(Defaults[kind])
    for key, value in overrides.items():
        if key not in result:
            raise UsageError("fuzz", "unknown_parameter", f"kind '{kind}' has no parameter '{key}'")
        result[key] = value
    return result


@dataclass
class FuzzCase:
    seed: int
    kind: str
    parameters: dict = field(default_factory=dict)
    instance: object = None
    oracle: object = None
    subject: object = None
    verdict: str = "pending"
    counterexample: Optional[dict] = None
    error: Optional[str] = None

    def fingerprint(self):
        # identifies the case by what regenerates it
        data = msgpack.packb([GENERATOR_VERSION, self.kind, self.seed, sorted(self.parameters.items())],
                             use_bin_type=True)
        return hashlib.sha256(data).hexdigest()

    def instanceFingerprint(self):
        return hashlib.sha256(render_instance(self.kind, self.instance).encode("utf-8")).hexdigest()

    def record(self):

        record = {"seed": self.seed,
                  "kind": self.kind,
                  "fingerprint": self.fingerprint(),
                  "parameters": dict(self.parameters),
                  "verdict": self.verdict}
        if self.verdict == "mismatch":
            record["counterexample"] = self.counterexample
        if self.error is not None:
            record["error"] = self.error
        return record


def render_instance(kind: str, instance):

    if kind == "formula":
        return serialize_formula(instance)
    if kind == "circuit":
        return serialize_circuit(instance)
    if kind == "mask":
        return serialize(instance)
    name, f = instance
    return f"{name}: {serialize_formula(f)}"


def _render(x):
    return "".join(str(b) for b in x) if isinstance(x, tuple) else x


# --------------------------------------------------------------------------------------------------
# generation

def generate_instance(kind: str, seed: int, params: dict):

    if kind == "formula":
        return gen_formula(seed, params["max_k"], params["max_depth"], tuple(params["alphabet"]))
    if kind == "circuit":
        return gen_circuit(seed, params["max_depth"], params["max_size"], params["arity"])
    if kind == "mask":
        return gen_mask_ir(seed, params["depth"], params["mixed"])

    rng = random.Random(seed)
    name = rng.choice(sorted(REDUCTIONS))
    return (name, gen_formula(seed, 1, 2, tuple(params["alphabet"])))


def generate_case(kind: str, seed: int, **overrides):
    params = parameters(kind, **overrides)
    return FuzzCase(seed, kind, params, generate_instance(kind, seed, params))


def inputs(kind: str, instance, params: dict):
    # inputs of one case, shortest first

    if kind == "circuit":
        return list(itertools.product((0, 1), repeat=instance.arity))
    alphabet = ("a", "b") if kind == "mask" else tuple(params["alphabet"])
    return ["".join(w) for w in words(alphabet, params["max_n"]) if w]


# --------------------------------------------------------------------------------------------------
# subjects and oracles
#
# A subject factory builds the transformer of an instance once and returns the function deciding
# single inputs with it; an oracle evaluates an instance on one input directly.

def formulaSubject(f, params):
    t = compile(f, tuple(params["alphabet"])).transformer
    return lambda w: bool(run(t, w, trace=False).decision)


_evaluator = None


def circuitSubject(c, params):

    global _evaluator
    if _evaluator is None:
        _evaluator = build_circuit_evaluator()
    t = _evaluator
    return lambda x: int(evaluate_instance(t, c, x))


def maskSubject(t, params):
    # the last block of the converted transformer, restricted to the original channels

    converted = to_causal(t)

    def residuals(w):
        result = run(converted, w, trace=False, strict_norms=False)
        size = 1 + len(w) + t.padding.count(len(w))
        return tuple(tuple(h[:t.width]) for h in result.residuals[-size:])
    return residuals


def stackSubject(instance, params):

    name, f = instance
    alphabet, max_n = tuple(params["alphabet"]), params["max_n"]
    T_f = build_reduction_transformer(name, alphabet, bit_width(reduction(name), max_n))
    T_L = compile(f, alphabet).transformer
    stacked = stack(T_f, T_L, StackBounds(max_n))
    return lambda w: bool(run(stacked, w, trace=False, strict_norms=False).decision)


def formulaOracle(f, w):
    return eval_formula(f, w)


def circuitOracle(c, x):
    return eval_circuit(c, x)


def maskOracle(t, w):
    return tuple(tuple(h) for h in run(t, w, trace=False).residuals)


def stackOracle(instance, w):
    name, f = instance
    return eval_formula(f, apply_reduction(name, w))


Subjects = {"formula": formulaSubject, "circuit": circuitSubject, "mask": maskSubject, "stack": stackSubject}
Oracles  = {"formula": formulaOracle, "circuit": circuitOracle, "mask": maskOracle, "stack": stackOracle}


# --------------------------------------------------------------------------------------------------
# shrinking

def _simplerFormulas(f):
    # f with one node replaced by one of its children

    for child in children(f):
        yield child
    if isinstance(f, (And, Or)):
        for left in _simplerFormulas(f.left):
            yield replace(f, left=left)
        for right in _simplerFormulas(f.right):
            yield replace(f, right=right)
    elif isinstance(f, (Not, Exists, Forall, Maj2)):
        for body in _simplerFormulas(f.body):
            yield replace(f, body=body)


def cone(c: Circuit, gate: int):
    ''' The circuit computing gate of c, keeping all X gates so the arity is unchanged

        The gate becomes the single output and is serialized last.
    '''

    keep, pending = set(c.inputs()), [gate]
    while pending:
        g = pending.pop()
        if g not in keep:
            keep.add(g)
            pending += c.gate(g).args

    order = sorted(keep - {gate}) + [gate]
    position = {old: new for new, old in enumerate(order, start=1)}
    gates = tuple(Gate(c.gate(old).kind, tuple(position[a] for a in c.gate(old).args)) for old in order)
    return Circuit(gates, (len(order),))


def _simplerCircuits(c: Circuit):
    for gate in range(1, len(c.gates) + 1):
        if gate != c.output and c.gate(gate).kind != GateKind.X:
            yield cone(c, gate)


def _simplerInstances(kind: str, instance):

    if kind == "formula":
        yield from (f for f in _simplerFormulas(instance) if is_sentence(f))
    elif kind == "circuit":
        yield from _simplerCircuits(instance)
    elif kind == "stack":
        name, f = instance
        yield from ((name, g) for g in _simplerFormulas(f) if is_sentence(g))


def _shorterInputs(kind: str, x, params: dict):
    # words with one letter dropped, then with one letter replaced by the first letter

    if kind == "circuit":
        return
    alphabet = ("a", "b") if kind == "mask" else tuple(params["alphabet"])
    for i in range(len(x)):
        if len(x) > 1:
            yield x[:i] + x[i + 1:]
    for i, letter in enumerate(x):
        if letter != alphabet[0]:
            yield x[:i] + alphabet[0] + x[i + 1:]


class Shrinker():

    def __init__(self, case: FuzzCase, subject, oracle):
        self.__logger = logging.getLogger("Fuzz")
        self.case     = case
        self.subject  = subject
        self.oracle   = oracle

    def mismatch(self, instance, x, decide=None):
        # (expected, actual) when the instance disagrees on x, otherwise None

        decide = decide or self.subject(instance, self.case.parameters)
        expected, actual = self.oracle(instance, x), decide(x)
        return (expected, actual) if expected != actual else None

    def firstMismatch(self, instance):

        decide = self.subject(instance, self.case.parameters)
        for x in inputs(self.case.kind, instance, self.case.parameters):
            found = self.mismatch(instance, x, decide)
            if found:
                return x, found
        return None

    def shrink(self, instance, x, found):

        kind, params = self.case.kind, self.case.parameters
        steps, changed = 0, True
        while changed:
            changed = False
            for candidate in _simplerInstances(kind, instance):
                try:
                    result = self.firstMismatch(candidate)
                except AhatError:
                    #candidates outside the domain of the construction are no smaller counterexample
                    continue
                if result:
                    instance, (x, found) = candidate, result
                    changed, steps = True, steps + 1
                    break
            if changed:
                continue
            for shorter in _shorterInputs(kind, x, params):
                result = self.mismatch(instance, shorter)
                if result:
                    x, found = shorter, result
                    changed, steps = True, steps + 1
                    break

        self.__logger.debug(f"Shrunk case {self.case.seed} in {steps} steps")
        return instance, x, found


# --------------------------------------------------------------------------------------------------
# runs

def differential_run(case: FuzzCase, subject=None, oracle=None):
    ''' Compares subject and oracle on all inputs of the case and sets its verdict

        The verdict is "pass", "mismatch" with a shrunk counterexample, or "error" carrying the uri
        of the toolkit error raised while building or running the case. subject and oracle default
        to the ones of the case kind; a subject is a factory (instance, parameters) -> decide(x).
    '''

    logger  = logging.getLogger("Fuzz")
    subject = subject or Subjects[case.kind]
    oracle  = oracle or Oracles[case.kind]

    try:
        if case.instance is None:
            case.instance = generate_instance(case.kind, case.seed, case.parameters)

        shrinker = Shrinker(case, subject, oracle)
        result = shrinker.firstMismatch(case.instance)
        if result is None:
            case.verdict = "pass"
            return case

        x, found = result
        instance, x, (expected, actual) = shrinker.shrink(case.instance, x, found)
        case.verdict, case.oracle, case.subject = "mismatch", expected, actual
        case.counterexample = {"instance": render_instance(case.kind, instance),
                               "input": _render(x),
                               "oracle": _summary(expected),
                               "subject": _summary(actual)}
        logger.info(f"Case {case.seed} of kind {case.kind} mismatches on {_render(x)}")

    except AhatError as e:
        case.verdict, case.error = "error", e.error
        logger.warning(f"Case {case.seed} of kind {case.kind} failed: {e}")

    return case


def _summary(value):
    # residual tuples are reported by their rendering

    if isinstance(value, tuple):
        return [[str(x) for x in h] for h in value]
    return value
