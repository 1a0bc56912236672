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

import logging, os

import pytest

from Circuits.Circuit import parse_circuit
from Logic.Parser import parse_formula
from Utils.Config import Settings
from Utils.Logging import setupLogging, ErrorFilter

CorpusDir = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "Corpus")


def corpusFormulas():
    # (text, formula) of every corpus sentence

    result = []
    with open(os.path.join(CorpusDir, "formulas.txt"), encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                result.append((line, parse_formula(line)))
    return result


def corpusCircuit(name):
    with open(os.path.join(CorpusDir, "circuits", name), encoding="utf-8") as f:
        return parse_circuit(f.read())


def pytest_configure(config):

    settings = Settings.fromEnvironment()
    setupLogging(settings.testLogLevel)

    #attach to the handler, filters on the root logger are not applied to child loggers
    if settings.strictTestLog:
        for handler in logging.getLogger().handlers:
            handler.addFilter(ErrorFilter())


@pytest.fixture(scope="session")
def formulas():
    return corpusFormulas()


@pytest.fixture(scope="session")
def appendix_circuits():
    return corpusCircuit("appendix_first.ckt"), corpusCircuit("appendix_second.ckt")


@pytest.fixture
def corpus_dir():
    return CorpusDir


@pytest.fixture(scope="session")
def corpus_circuit():
    def load(name):
        return corpusCircuit(name + ".ckt")
    return load
