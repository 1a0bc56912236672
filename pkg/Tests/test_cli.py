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

import json, os

import pytest

from Cli import dispatch


def circuitFile(corpus_dir, name):
    return os.path.join(corpus_dir, "circuits", f"{name}.ckt")


def test_fo_eval(capsys):

    assert dispatch(["fo", "eval", "E i. Qa(i)", "--word", "ba"]) == 0
    assert capsys.readouterr().out.strip() == "true"


def test_negative_exit(capsys):

    assert dispatch(["fo", "eval", "A i. Qa(i)", "--word", "ba"]) == 0
    assert dispatch(["--negative-exit", "fo", "eval", "A i. Qa(i)", "--word", "ba"]) == 1
    assert capsys.readouterr().out.split() == ["false", "false"]


def test_fo_parse_and_enum(capsys):

    assert dispatch(["fo", "parse", "E i. E j. Qa(i) & Qb(j)"]) == 0
    assert "variables 2, depth 4" in capsys.readouterr().out

    assert dispatch(["fo", "enum", "A i. Qa(i)", "--max-n", "2"]) == 0
    assert capsys.readouterr().out.splitlines() == ["", "a", "aa"]


def test_fo_formula_from_file(tmp_path, capsys):

    path = tmp_path / "formula.txt"
    path.write_text("E i. Qb(i) & i = n\n", encoding="utf-8")
    assert dispatch(["fo", "eval", "--file", str(path), "--word", "ab"]) == 0
    assert capsys.readouterr().out.strip() == "true"


def test_syntax_error_status(capsys):

    assert dispatch(["fo", "parse", "E i. Qa(i"]) == 3
    assert "ahat.error.syntax.formula" in capsys.readouterr().err


def test_usage_error_status(corpus_dir, capsys):

    assert dispatch(["fo", "shuffle"]) == 2
    assert dispatch(["circuit", "compose", "serial", circuitFile(corpus_dir, "xor")]) == 2
    assert "ahat.error.usage.cli.missing_circuit" in capsys.readouterr().err


def test_domain_error_status(capsys):

    assert dispatch(["fo", "compile", "E i. bit(i, 1)"]) == 3
    assert "bit_unsupported" in capsys.readouterr().err


def test_compile_and_run(tmp_path, capsys):

    ir, trace = str(tmp_path / "exists.ir"), str(tmp_path / "trace.jsonl")
    assert dispatch(["fo", "compile", "E i. Qa(i)", "--out", ir, "--plan", str(tmp_path / "plan.json")]) == 0
    assert os.path.exists(tmp_path / "plan.json")

    assert dispatch(["run", "--ir", ir, "--word", "bab", "--trace", trace]) == 0
    assert capsys.readouterr().out.strip() == "1"
    with open(trace, encoding="utf-8") as f:
        lines = [json.loads(line) for line in f]
    assert lines
    assert all("step" in line for line in lines)

    assert dispatch(["--negative-exit", "run", "--ir", ir, "--word", "bb"]) == 1


def test_binary_ir(tmp_path, capsys):

    ir = str(tmp_path / "exists.irb")
    assert dispatch(["fo", "compile", "E i. Qb(i)", "--out", ir]) == 0
    assert dispatch(["run", "--ir", ir, "--word", "ab"]) == 0
    assert capsys.readouterr().out.strip() == "1"


def test_circuit_commands(corpus_dir, capsys):

    first = circuitFile(corpus_dir, "appendix_first")
    assert dispatch(["circuit", "eval", "--file", first, "--input", "101"]) == 0
    assert capsys.readouterr().out.strip() == "1"

    assert dispatch(["circuit", "depth", "--file", first]) == 0
    assert capsys.readouterr().out.strip() == "2"

    assert dispatch(["circuit", "wide-check", "--file", first, "--n", "4", "--c", "1", "--d", "1"]) == 0
    assert capsys.readouterr().out.strip() == "true"

    assert dispatch(["circuit", "eval", "--file", first, "--input", "10"]) == 3


def test_circuit_compose(corpus_dir, tmp_path, capsys):

    out = str(tmp_path / "composed.ckt")
    xor, maj3 = circuitFile(corpus_dir, "xor"), circuitFile(corpus_dir, "maj3")
    assert dispatch(["circuit", "compose", "parallel", maj3, maj3, "--out", out]) == 0
    assert dispatch(["circuit", "eval", "--file", out, "--input", "110"]) == 0
    assert capsys.readouterr().out.strip() == "11"

    assert dispatch(["circuit", "compose", "serial", maj3, xor]) == 3


def test_short_evaluator_refuses_unresolved_output(corpus_dir, tmp_path, capsys):

    evaluator = str(tmp_path / "once.irb")
    xor = circuitFile(corpus_dir, "xor")
    assert dispatch(["circuit", "compile-evaluator", "--exponent", "0", "--coefficient", "1", "--out", evaluator]) == 0
    assert dispatch(["circuit", "eval", "--file", xor, "--input", "10", "--evaluator", evaluator]) == 3
    assert "ahat.error.domain.circuit.unresolved_gate" in capsys.readouterr().err


def test_file_errors_are_usage_errors(tmp_path, capsys):

    missing = tmp_path / "missing"
    assert dispatch(["fo", "compile", "E i. Qa(i)", "--out", str(missing / "exists.ir")]) == 2
    assert "ahat.error.usage.cli.unwritable_file" in capsys.readouterr().err

    assert dispatch(["fo", "compile", "E i. Qa(i)", "--plan", str(missing / "plan.json")]) == 2
    assert "ahat.error.usage.cli.unwritable_file" in capsys.readouterr().err

    assert dispatch(["run", "--ir", str(missing / "exists.ir"), "--word", "a"]) == 2
    assert "ahat.error.usage.cli.unreadable_file" in capsys.readouterr().err


def test_reduce_commands(capsys):

    assert dispatch(["reduce", "apply", "reverse", "--word", "aab"]) == 0
    assert capsys.readouterr().out.strip() == "baa"

    assert dispatch(["reduce", "member", "duplicate", "--word", "ab", "--index", "011", "--token", "a"]) == 0
    assert capsys.readouterr().out.strip() == "true"


def test_fuzz_command(tmp_path, capsys):

    report = str(tmp_path / "verdicts.jsonl")
    assert dispatch(["fuzz", "formulas", "--seed", "1", "--cases", "2", "--max-n", "2", "--report", report]) == 0
    assert json.loads(capsys.readouterr().out) == {"pass": 2}
    with open(report, encoding="utf-8") as f:
        assert len(f.readlines()) == 2


def test_fuzz_report_in_missing_directory(tmp_path, capsys):

    report = str(tmp_path / "missing" / "verdicts.jsonl")
    assert dispatch(["fuzz", "formulas", "--seed", "1", "--cases", "2", "--max-n", "2", "--report", report]) == 2
    assert "ahat.error.usage.fuzz.unwritable_report" in capsys.readouterr().err
