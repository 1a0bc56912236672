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

import asyncio, json, logging
from collections import Counter
from functools import partial

import aiofiles

from Fuzz.Differential import FuzzCase, differential_run, parameters, generate_instance
from Fuzz.Generate import case_seeds
from Utils.Config import Settings
from Utils.Errorhandling import ErrorClass, UsageError, errorUri


class VerdictCollector():
    #Ordered runner that receives finished cases in any order and records them in case order.
    #Records are appended to the report file (line delimited json) if a path is given.

    def __init__(self, path, cases, logger):

        self.__logger       = logger
        self.__path         = path
        self.__expected     = cases
        self.__pending      = {}
        self.__next         = 0
        self.__records      = []
        self.__syncEvent    = asyncio.Event()
        self.__doneEvent    = asyncio.Event()
        self.__shutdown     = False

        self.__maintask = asyncio.ensure_future(self.__run())

    @property
    def records(self):
        return list(self.__records)

    def add(self, index: int, case: FuzzCase):
        self.__pending[index] = case
        self.__syncEvent.set()

    async def waitTillCloseout(self, timeout=None):
        try:
            await asyncio.wait_for(self.__doneEvent.wait(), timeout)

        except asyncio.TimeoutError:
            self.__logger.error(f"Collector closeout timed out after {self.__next} of {self.__expected} cases")

    async def close(self, timeout=None):
        await self.waitTillCloseout(timeout)
        try:
            self.__shutdown = True
            if not self.__maintask.done():
                self.__maintask.cancel()
            await self.__maintask
        except asyncio.CancelledError:
            pass
        except OSError as e:
            raise UsageError("fuzz", "unwritable_report", f"Cannot write the verdict report {self.__path}: {e}") from e

    async def __run(self):

        if self.__expected == 0:
            self.__doneEvent.set()

        report = None
        try:
            if self.__path:
                report = await aiofiles.open(self.__path, "w")

            while not self.__doneEvent.is_set():
                await self.__syncEvent.wait()
                self.__syncEvent.clear()

                #write all cases that are next in order
                while self.__next in self.__pending:
                    case = self.__pending.pop(self.__next)
                    self.__next += 1
                    record = case.record()
                    self.__records.append(record)
                    if report is not None:
                        try:
                            await report.write(json.dumps(record, ensure_ascii=False) + "\n")
                        except Exception as e:
                            self.__logger.error(f"Writing verdict of case {case.seed} failed: {e}")

                if self.__next >= self.__expected:
                    self.__doneEvent.set()
        finally:
            self.__doneEvent.set()
            if report is not None:
                await report.close()


class CaseRunner():
    ''' Runs fuzz cases concurrently

        Every case runs in the default executor, at most workers at a time. A failing case never
        stops the others: toolkit errors are verdicts of their own, anything else is recorded as
        an internal error.
    '''

    def __init__(self, workers: int=None, subject=None):

        self.__logger = logging.getLogger("Fuzz")
        self.workers  = workers or Settings.fromEnvironment().fuzzWorkers
        self.subject  = subject

    async def execute(self, cases, report: str=None):

        loop      = asyncio.get_running_loop()
        semaphore = asyncio.Semaphore(self.workers)
        collector = VerdictCollector(report, len(cases), self.__logger)

        async def one(index, case):
            async with semaphore:
                try:
                    await loop.run_in_executor(None, partial(differential_run, case, self.subject))
                except Exception as e:
                    case.verdict = "error"
                    case.error   = errorUri(ErrorClass.internal, "fuzz", type(e).__name__)
                    self.__logger.error(f"Case {case.seed} crashed: {e}")
            collector.add(index, case)

        await asyncio.gather(*(one(i, case) for i, case in enumerate(cases)))
        await collector.close()

        counts = summary(cases)
        self.__logger.info(f"Ran {len(cases)} cases with {self.workers} workers: {counts}")
        return collector.records


def suite(kind: str, seed: int, cases: int, **overrides):
    # the cases of one suite; case seeds derive from the suite seed

    params = parameters(kind, **overrides)
    return [FuzzCase(s, kind, dict(params), generate_instance(kind, s, params)) for s in case_seeds(seed, cases)]


def summary(cases):
    return dict(Counter(case.verdict for case in cases))


def run_suite(kind: str, seed: int, cases: int, *, report: str=None, workers: int=None, subject=None, **overrides):
    ''' Generates and runs a suite, returns the verdict records in case order

        report names a line delimited json file receiving one record per case.
    '''

    generated = suite(kind, seed, cases, **overrides)
    return asyncio.run(CaseRunner(workers, subject).execute(generated, report))
