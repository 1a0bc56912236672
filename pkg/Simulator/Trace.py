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

import asyncio, json
from dataclasses import dataclass, field
from typing import List, Optional

import aiofiles

from Simulator.Attention import HeadRecord


@dataclass
class SublayerRecord:
    ''' Everything captured for one executed sublayer

        step      - running number of the executed sublayer
        block     - "A", "B" or "C"
        iteration - loop iteration (1 based) for block B, 0 otherwise
        residuals - residual stream of all positions after the sublayer, None if not captured
        heads     - attention records per head, empty for feedforward and gadget sublayers
    '''

    step: int
    block: str
    iteration: int
    index: int
    name: str
    kind: str
    residuals: Optional[list] = None
    heads: List[HeadRecord] = field(default_factory=list)


class Trace():
    ''' Execution record of one simulator run

        The capture mode selects what is kept:
        True / "all"  - residual snapshot after every sublayer and all attention records
        "iterations"  - residual snapshots after block A and after every loop iteration only
        "ties"        - attention records only
        False         - nothing but the tokens
    '''

    def __init__(self, mode, tokens, channels=()):

        if mode is True:
            mode = "all"
        if mode not in ("all", "iterations", "ties", False, None):
            raise ValueError(f"unknown trace mode {mode}")

        self.mode      = mode or None
        self.tokens    = list(tokens)
        self.channels  = tuple(channels)
        self.records   = []
        self.snapshots = []

    @property
    def keepsResiduals(self):
        return self.mode == "all"

    @property
    def keepsTies(self):
        return self.mode in ("all", "ties")

    @property
    def keepsSnapshots(self):
        return self.mode in ("all", "iterations")

    def add(self, record: SublayerRecord):
        if self.mode:
            self.records.append(record)

    def snapshot(self, label, residuals):
        if self.keepsSnapshots:
            self.snapshots.append((label, [tuple(h) for h in residuals]))

    def iterationSnapshots(self):
        # residuals after block A (index 0) and after every loop iteration (index r)
        return [residuals for label, residuals in self.snapshots if label != "C"]

    def ties(self, step: int):
        for record in self.records:
            if record.step == step:
                return record.heads
        return []

    def attentionRecords(self):
        return [record for record in self.records if record.heads]

    def uncertified(self):
        # (step, head, position) of every tie set not backed by identical keys

        failures = []
        for record in self.attentionRecords():
            for k, head in enumerate(record.heads):
                for i in range(len(head.ties)):
                    if not head.certified(i):
                        failures.append((record.step, k, i))
        return failures

    def lines(self, channels=None):
        # line records for export; channels is an iterable of indices or None for all

        selected = None if channels is None else sorted(set(channels))
        for record in self.records:
            base = {"step": record.step, "block": record.block, "iteration": record.iteration,
                    "sublayer": record.index, "name": record.name, "kind": record.kind}

            for k, head in enumerate(record.heads):
                for i in range(len(head.ties)):
                    yield dict(base, head=k, position=i, ties=head.tieSet(i), certified=head.certified(i))

            if record.residuals is None or selected == []:
                continue

            for i, h in enumerate(record.residuals):
                picks = range(len(h)) if selected is None else selected
                residual = {self.__channelName(c): str(h[c]) for c in picks if h[c]}
                yield dict(base, position=i, token=self.tokens[i], residual=residual)

    def __channelName(self, c):
        return self.channels[c] if c < len(self.channels) else str(c)


def channelSelection(trace: Trace, names):
    # maps a list of channel names (or prefixes of named blocks) to indices; None keeps all

    if names is None:
        return None

    indices = []
    for name in names:
        if name.isdigit():
            indices.append(int(name))
            continue
        indices += [i for i, channel in enumerate(trace.channels)
                    if channel == name or channel.startswith(name + "[")]
    return indices


async def exportTrace(trace: Trace, path: str, channels=None):
    # writes the trace as line delimited json

    async with aiofiles.open(path, "w") as f:
        for line in trace.lines(channels):
            await f.write(json.dumps(line, ensure_ascii=False) + "\n")


def writeTrace(trace: Trace, path: str, channels=None):
    asyncio.run(exportTrace(trace, path, channels))
