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

import json

import pytest
from hypothesis import given, settings, strategies as st

from Circuits import eval_circuit, gate_values
from Fuzz import FuzzCase, parameters, generate_case, differential_run, run_suite, suite, summary, cone
from Fuzz.Generate import gen_circuit
from Logic.Formula import One, N, QSigma, Eq, Leq, Geq, And, Or, Not, Exists, Forall, Maj2
from Logic.Parser import parse_formula
from Logic.Formula import serialize_formula
from Utils.Errorhandling import DomainError, UsageError, ErrorClass, errorUri, isAhatError


def lenient(f, w, v=None):
    # formula evaluation with a broken universal quantifier: n−1 witnesses suffice

    v, n = v or {}, len(w)

    def index(i):
        if isinstance(i, One):
            return 1
        if isinstance(i, N):
            return n
        return v[i.name]

    if isinstance(f, QSigma):
        m = index(f.index)
        return 1 <= m <= n and w[m - 1] == f.token
    if isinstance(f, Eq):
        return index(f.left) == index(f.right)
    if isinstance(f, Leq):
        return index(f.left) <= index(f.right)
    if isinstance(f, Geq):
        return index(f.left) >= index(f.right)
    if isinstance(f, And):
        return lenient(f.left, w, v) and lenient(f.right, w, v)
    if isinstance(f, Or):
        return lenient(f.left, w, v) or lenient(f.right, w, v)
    if isinstance(f, Not):
        return not lenient(f.body, w, v)
    if isinstance(f, Exists):
        return any(lenient(f.body, w, {**v, f.var: m}) for m in range(1, n + 1))
    if isinstance(f, Forall):
        return sum(1 for m in range(1, n + 1) if lenient(f.body, w, {**v, f.var: m})) >= n - 1
    if isinstance(f, Maj2):
        count = sum(1 for a in range(1, n + 1) for b in range(1, n + 1)
                    if lenient(f.body, w, {**v, f.first: a, f.second: b}))
        return 2 * count > n * n
    raise TypeError(f)


def lenientSubject(f, params):
    return lambda w: lenient(f, w)


def test_parameters():

    assert parameters("formula", max_n=2)["max_n"] == 2
    with pytest.raises(UsageError) as e:
        parameters("formula", width=3)
    assert isAhatError(e.value, ErrorClass.usage, "fuzz", "unknown_parameter")
    with pytest.raises(UsageError):
        parameters("automaton")


def test_fingerprint_is_deterministic():

    first, second = generate_case("formula", 11), generate_case("formula", 11)
    assert first.fingerprint() == second.fingerprint()
    assert first.instance == second.instance
    assert first.instanceFingerprint() == second.instanceFingerprint()
    assert generate_case("formula", 12).fingerprint() != first.fingerprint()
    assert generate_case("formula", 11, max_n=2).fingerprint() != first.fingerprint()


def test_suite_seeds_are_reproducible():

    first, second = suite("circuit", 5, 4), suite("circuit", 5, 4)
    assert [c.seed for c in first] == [c.seed for c in second]
    assert [c.instance for c in first] == [c.instance for c in second]


def test_planted_quantifier_bug_is_found_and_shrunk():

    f = parse_formula("(E j. Qb(j)) & (A i. Qa(i))")
    case = FuzzCase(seed=0, kind="formula", parameters=parameters("formula"), instance=f)
    differential_run(case, subject=lenientSubject)

    assert case.verdict == "mismatch"
    assert case.counterexample["instance"] == serialize_formula(parse_formula("A i. Qa(i)"))
    assert case.counterexample["input"] == "b"
    assert case.counterexample["oracle"] is False
    assert case.counterexample["subject"] is True


def test_healthy_formula_suite_passes():

    records = run_suite("formula", 3, 4, workers=2, max_n=2)
    assert [r["verdict"] for r in records] == ["pass"] * 4


def test_healthy_circuit_suite_passes():

    records = run_suite("circuit", 3, 2, workers=2, max_depth=2, max_size=5, arity=2)
    assert [r["verdict"] for r in records] == ["pass"] * 2


@pytest.mark.slow
def test_circuit_acceptance_suite_passes():

    records = run_suite("circuit", 5, 200, max_depth=5, max_size=40, arity=6)
    assert summary_of(records) == {"pass": 200}


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["mask", "stack"])
def test_healthy_transformer_suites_pass(kind):

    records = run_suite(kind, 1, 2, workers=2)
    assert summary_of(records) == {"pass": 2}


def summary_of(records):
    result = {}
    for r in records:
        result[r["verdict"]] = result.get(r["verdict"], 0) + 1
    return result


def test_report_is_written_in_case_order(tmp_path):

    path = tmp_path / "verdicts.jsonl"
    records = run_suite("formula", 9, 5, report=str(path), workers=3, subject=lenientSubject, max_n=2)

    with open(path, encoding="utf-8") as f:
        written = [json.loads(line) for line in f]
    assert written == records
    assert [r["seed"] for r in written] == [c.seed for c in suite("formula", 9, 5, max_n=2)]
    for r in written:
        assert r["verdict"] in ("pass", "mismatch")
        assert ("counterexample" in r) == (r["verdict"] == "mismatch")


def test_unwritable_report_fails_the_suite(tmp_path):

    report = tmp_path / "missing" / "verdicts.jsonl"
    with pytest.raises(UsageError) as exc:
        run_suite("formula", 3, 2, report=str(report), workers=2, max_n=2)
    assert exc.value.reason == "unwritable_report"
    assert not report.exists()


def test_errors_become_verdicts():

    def rejecting(instance, params):
        raise DomainError("compile", "constant_sentence", "planted")

    case = generate_case("formula", 4)
    differential_run(case, subject=rejecting)
    assert case.verdict == "error"
    assert case.error == errorUri(ErrorClass.domain, "compile", "constant_sentence")
    assert case.record()["error"] == case.error


def test_crashes_become_internal_errors():

    def crashing(instance, params):
        raise ValueError("planted")

    records = run_suite("formula", 2, 2, workers=1, subject=crashing)
    assert {r["error"] for r in records} == {errorUri(ErrorClass.internal, "fuzz", "ValueError")}
    cases = suite("formula", 2, 2)
    assert summary(cases) == {"pending": 2}


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_cones_compute_their_gate(seed):

    c = gen_circuit(seed, max_depth=3, max_size=10, arity=3)
    xs = ["000", "011", "101", "110", "111"]
    for gate in range(1, len(c.gates) + 1):
        if gate in c.inputs():
            continue
        part = cone(c, gate)
        assert part.arity == c.arity
        for x in xs:
            assert eval_circuit(part, x) == gate_values(c, x)[gate]
