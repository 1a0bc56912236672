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
Command line of the toolkit

Every subcommand parses its arguments, calls one library operation and prints the result. Exit
status: 0 on success, 1 on a negative decision when --negative-exit is given, 2 on usage errors and
3 on domain, validation and syntax errors.
'''

import argparse, json, logging, sys
from contextlib import contextmanager

from Circuits.Circuit import parse_circuit, serialize_circuit
from Circuits.Compose import compose_serial, compose_parallel, compose_recurrent
from Circuits.Evaluate import eval_outputs, depth, size, is_wide_witness
from Circuits.Evaluator import build_circuit_evaluator, evaluate_instance
from Compiler.Compile import compile
from Fuzz.Differential import Kinds
from Fuzz.Runner import run_suite
from IR.Depth import parallel_depth
from IR.Serialize import load, dump
from Logic.Evaluate import eval_formula, enumerate_language
from Logic.Formula import formula_metrics, serialize_formula
from Logic.Parser import parse_formula
from Masking.Convert import to_causal, convert_report
from Reduce.Reduction import reduction, bit_width, apply_reduction, membership_R
from Reduce.Stack import stack, StackBounds
from Reduce.Transformers import build_reduction_transformer
from Simulator.Runner import run
from Simulator.Trace import writeTrace, channelSelection
from Utils.Config import Settings
from Utils.Errorhandling import AhatError, ErrorClass, UsageError
from Utils.Logging import setupLogging

ExitStatus = {
    ErrorClass.usage:      2,
    ErrorClass.domain:     3,
    ErrorClass.validation: 3,
    ErrorClass.syntax:     3,
}


def _read(path: str):
    # file content, "-" reads standard input

    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise UsageError("cli", "unreadable_file", f"cannot read {path}: {e.strerror}")


@contextmanager
def _writing(path: str):
    try:
        yield
    except OSError as e:
        raise UsageError("cli", "unwritable_file", f"cannot write {path}: {e.strerror}")


def _write(text: str, path: str=None):

    if path is None or path == "-":
        sys.stdout.write(text + "\n")
        return
    with _writing(path), open(path, "w", encoding="utf-8") as f:
        f.write(text + "\n")


def _load(path: str):
    try:
        return load(path)
    except OSError as e:
        raise UsageError("cli", "unreadable_file", f"cannot read {path}: {e.strerror}")


def _dump(t, path: str):
    with _writing(path):
        dump(t, path)


def _writeTrace(trace, path: str, channels):
    with _writing(path):
        writeTrace(trace, path, channels)


def _alphabet(args):
    # letters of --alphabet, or the tokens of an alphabet manifest (one token per line)

    if getattr(args, "alphabet_file", None):
        return tuple(line.strip() for line in _read(args.alphabet_file).splitlines() if line.strip())
    return tuple(args.alphabet)


def _word(args, text):
    # words over manifests are whitespace separated tokens
    if getattr(args, "alphabet_file", None):
        return tuple(text.split())
    return text


def _formula(args):

    if args.formula is not None:
        return parse_formula(args.formula)
    if args.file is not None:
        return parse_formula(_read(args.file))
    raise UsageError("cli", "missing_formula", "give a formula or --file")


def _decision(args, positive: bool):
    return 1 if args.negative_exit and not positive else 0


# --------------------------------------------------------------------------------------------------
# fo

def foParse(args):
    f = _formula(args)
    k, l = formula_metrics(f)
    print(serialize_formula(f))
    print(f"variables {k}, depth {l}")
    return 0


def foEval(args):
    result = eval_formula(_formula(args), _word(args, args.word))
    print("true" if result else "false")
    return _decision(args, result)


def foEnum(args):
    alphabet = _alphabet(args)
    for w in enumerate_language(_formula(args), alphabet, args.max_n):
        print(w if isinstance(w, str) else " ".join(w))
    return 0


def foCompile(args):

    artifact = compile(_formula(args), _alphabet(args), strict_sublayers=args.strict_sublayers)
    _dump(artifact.transformer, args.out)
    if args.plan:
        _write(artifact.plan.dumps(), args.plan)
    k, l = artifact.metrics
    logging.getLogger("Cli").info(f"Compiled formula with {k} variables and depth {l}, "
                                  f"parallel depth {parallel_depth(artifact.transformer)}")
    return 0


# --------------------------------------------------------------------------------------------------
# transformers

def _channels(args, trace):
    names = args.channels.split(",") if args.channels else Settings.fromEnvironment().traceChannels
    return channelSelection(trace, names)


def runTransformer(args):

    t = _load(args.ir)
    mode = True if args.trace else False
    result = run(t, _word(args, args.word), trace=mode, strict_norms=not args.lax_norms)
    if args.trace:
        _writeTrace(result.trace, args.trace, _channels(args, result.trace))
    print(result.decision)
    return _decision(args, result.decision not in (0, None))


def traceTransformer(args):

    t = _load(args.ir)
    result = run(t, _word(args, args.word), trace=True, strict_norms=not args.lax_norms)
    _writeTrace(result.trace, args.out, _channels(args, result.trace))
    uncertified = result.trace.uncertified()
    if uncertified:
        print(f"{len(uncertified)} uncertified tie sets", file=sys.stderr)
    print(result.decision)
    return 0


def convertMask(args):

    t = _load(args.ir)
    converted = to_causal(t)
    _dump(converted, args.out)
    if args.report:
        print(json.dumps(convert_report(t, converted), indent=1))
    return 0


# --------------------------------------------------------------------------------------------------
# circuits

def _circuit(path):
    return parse_circuit(_read(path))


def circuitParse(args):
    c = _circuit(args.file)
    print(serialize_circuit(c))
    print(f"gates {size(c)}, inputs {c.arity}, outputs {list(c.outputs)}")
    return 0


def circuitEval(args):

    c = _circuit(args.file)
    if args.evaluator:
        value = evaluate_instance(_load(args.evaluator), c, args.input)
        outputs = (value,)
    else:
        outputs = eval_outputs(c, args.input)
    print("".join(str(v) for v in outputs))
    return _decision(args, outputs[-1] == 1)


def circuitDepth(args):
    print(depth(_circuit(args.file)))
    return 0


def circuitWideCheck(args):
    result = is_wide_witness(_circuit(args.file), args.n, args.c, args.d)
    print("true" if result else "false")
    return _decision(args, result)


def circuitEvaluator(args):
    _dump(build_circuit_evaluator(args.exponent, args.coefficient), args.out)
    return 0


def circuitCompose(args):

    first = _circuit(args.first)
    if args.mode == "recurrent":
        c = compose_recurrent(first, args.r)
    else:
        if args.second is None:
            raise UsageError("cli", "missing_circuit", f"{args.mode} composition needs a second circuit")
        compose = compose_serial if args.mode == "serial" else compose_parallel
        c = compose(first, _circuit(args.second))
    _write(serialize_circuit(c), args.out)
    return 0


# --------------------------------------------------------------------------------------------------
# reductions

def reduceApply(args):
    image = apply_reduction(args.reduction, _word(args, args.word))
    print(image if isinstance(image, str) else " ".join(image))
    return 0


def reduceMember(args):
    result = membership_R(args.reduction, _word(args, args.word), args.index, args.token)
    print("true" if result else "false")
    return _decision(args, result)


def reduceStack(args):

    alphabet = _alphabet(args)
    f = reduction(args.reduction)
    T_f = build_reduction_transformer(f, alphabet, bit_width(f, args.max_n))
    if args.recognizer:
        T_L = _load(args.recognizer)
    else:
        T_L = compile(_formula(args), alphabet).transformer
    _dump(stack(T_f, T_L, StackBounds(args.max_n)), args.out)
    return 0


# --------------------------------------------------------------------------------------------------
# fuzz

def fuzz(args):

    overrides = {}
    if args.max_n is not None:
        overrides["max_n"] = args.max_n
    records = run_suite(args.kind, args.seed, args.cases, report=args.report, workers=args.workers, **overrides)

    counts = {}
    for record in records:
        counts[record["verdict"]] = counts.get(record["verdict"], 0) + 1
    print(json.dumps(counts, sort_keys=True))
    return 0 if counts.get("mismatch", 0) == 0 and counts.get("error", 0) == 0 else 1


# --------------------------------------------------------------------------------------------------
# parser

def _formulaArguments(parser):
    parser.add_argument("formula", nargs="?", help="formula text")
    parser.add_argument("--file", help="read the formula from a file, - for stdin")


def _alphabetArguments(parser):
    parser.add_argument("--alphabet", default="ab", help="single character letters")
    parser.add_argument("--alphabet-file", help="manifest with one token per line")


def buildParser():

    parser = argparse.ArgumentParser(prog="ahat", description="Exact averaging hard attention transformer toolkit")
    parser.add_argument("--log-level", help="Error, Warn, Info, Debug or Trace")
    parser.add_argument("--negative-exit", action="store_true", help="exit with 1 on a negative decision")
    commands = parser.add_subparsers(dest="command", required=True)

    fo = commands.add_parser("fo", help="first order formulas").add_subparsers(dest="action", required=True)
    sub = fo.add_parser("parse")
    _formulaArguments(sub)
    sub.set_defaults(handler=foParse)
    sub = fo.add_parser("eval")
    _formulaArguments(sub)
    _alphabetArguments(sub)
    sub.add_argument("--word", required=True)
    sub.set_defaults(handler=foEval)
    sub = fo.add_parser("enum")
    _formulaArguments(sub)
    _alphabetArguments(sub)
    sub.add_argument("--max-n", type=int, default=4)
    sub.set_defaults(handler=foEnum)
    sub = fo.add_parser("compile")
    _formulaArguments(sub)
    _alphabetArguments(sub)
    sub.add_argument("--out", default="-", help="IR file, .irb for the binary format")
    sub.add_argument("--plan", help="write the channel plan sidecar")
    sub.add_argument("--strict-sublayers", action="store_true")
    sub.set_defaults(handler=foCompile)

    for name, handler in (("run", runTransformer), ("trace", traceTransformer)):
        sub = commands.add_parser(name)
        sub.add_argument("--ir", required=True)
        sub.add_argument("--word", required=True)
        sub.add_argument("--alphabet-file")
        sub.add_argument("--channels", help="comma separated channel names for the trace")
        sub.add_argument("--lax-norms", action="store_true", help="do not assert declared read norms")
        if name == "run":
            sub.add_argument("--trace", help="write the trace to this file")
        else:
            sub.add_argument("--out", required=True)
        sub.set_defaults(handler=handler)

    sub = commands.add_parser("convert-mask")
    sub.add_argument("--ir", required=True)
    sub.add_argument("--out", default="-")
    sub.add_argument("--report", action="store_true")
    sub.set_defaults(handler=convertMask)

    circuit = commands.add_parser("circuit", help="threshold circuits").add_subparsers(dest="action", required=True)
    for name, handler in (("parse", circuitParse), ("depth", circuitDepth)):
        sub = circuit.add_parser(name)
        sub.add_argument("--file", required=True)
        sub.set_defaults(handler=handler)
    sub = circuit.add_parser("eval")
    sub.add_argument("--file", required=True)
    sub.add_argument("--input", required=True)
    sub.add_argument("--evaluator", help="run this evaluator IR instead of the direct evaluation")
    sub.set_defaults(handler=circuitEval)
    sub = circuit.add_parser("wide-check")
    sub.add_argument("--file", required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--c", required=True, help="rational size exponent and depth coefficient")
    sub.add_argument("--d", type=int, required=True)
    sub.set_defaults(handler=circuitWideCheck)
    sub = circuit.add_parser("compile-evaluator")
    sub.add_argument("--exponent", type=int, default=1)
    sub.add_argument("--coefficient", type=int, default=2)
    sub.add_argument("--out", default="-")
    sub.set_defaults(handler=circuitEvaluator)
    sub = circuit.add_parser("compose")
    sub.add_argument("mode", choices=("serial", "parallel", "recurrent"))
    sub.add_argument("first")
    sub.add_argument("second", nargs="?")
    sub.add_argument("--r", type=int, default=1)
    sub.add_argument("--out", default="-")
    sub.set_defaults(handler=circuitCompose)

    reduce = commands.add_parser("reduce", help="reductions").add_subparsers(dest="action", required=True)
    sub = reduce.add_parser("apply")
    sub.add_argument("reduction")
    sub.add_argument("--word", required=True)
    sub.add_argument("--alphabet-file")
    sub.set_defaults(handler=reduceApply)
    sub = reduce.add_parser("member")
    sub.add_argument("reduction")
    sub.add_argument("--word", required=True)
    sub.add_argument("--index", required=True, help="binary index, most significant bit first")
    sub.add_argument("--token", required=True)
    sub.add_argument("--alphabet-file")
    sub.set_defaults(handler=reduceMember)
    sub = reduce.add_parser("stack")
    sub.add_argument("reduction")
    _formulaArguments(sub)
    _alphabetArguments(sub)
    sub.add_argument("--recognizer", help="recognizer IR instead of a formula")
    sub.add_argument("--max-n", type=int, required=True)
    sub.add_argument("--out", default="-")
    sub.set_defaults(handler=reduceStack)

    sub = commands.add_parser("fuzz")
    sub.add_argument("kind", choices=Kinds + ("formulas", "circuits"))
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--cases", type=int, default=20)
    sub.add_argument("--max-n", type=int)
    sub.add_argument("--workers", type=int)
    sub.add_argument("--report", help="line delimited json verdicts")
    sub.set_defaults(handler=fuzz)

    return parser


def dispatch(argv=None):
    ''' Runs the command line argv and returns the exit status '''

    parser = buildParser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    settings = Settings.fromEnvironment()
    setupLogging(args.log_level or settings.logLevel)
    if getattr(args, "kind", None) in ("formulas", "circuits"):
        args.kind = args.kind[:-1]

    try:
        return args.handler(args)

    except AhatError as e:
        status = ExitStatus.get(e.errclass)
        if status is None:
            raise
        logging.getLogger("Cli").debug(f"{args.command} failed: {e.error}")
        print(f"error: {e}", file=sys.stderr)
        return status


if __name__ == "__main__":
    sys.exit(dispatch())
