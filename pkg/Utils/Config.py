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

import os
from dataclasses import dataclass
from typing import Optional, Tuple


@dataclass(frozen=True)
class Settings():
    ''' Environment driven defaults

        All values can be overridden by the command line. Read them via fromEnvironment() and pass
        the resulting object around instead of querying the environment in the libraries.
    '''

    logLevel: str = "Warn"
    traceChannels: Optional[Tuple[str, ...]] = None     # None means all channels
    fuzzWorkers: int = 4
    testLogLevel: str = "Error"
    strictTestLog: bool = False

    @classmethod
    def fromEnvironment(cls, environ=None):

        env = os.environ if environ is None else environ

        channels = env.get("AHAT_TRACE_CHANNELS", "all").strip()
        if channels == "all":
            traceChannels = None
        elif channels == "none":
            traceChannels = ()
        else:
            traceChannels = tuple(c.strip() for c in channels.split(",") if c.strip())

        try:
            workers = max(1, int(env.get("AHAT_FUZZ_WORKERS", "4")))
        except ValueError:
            workers = 4

        return cls(logLevel      = env.get("AHAT_LOG_LEVEL", "Warn"),
                   traceChannels = traceChannels,
                   fuzzWorkers   = workers,
                   testLogLevel  = env.get("AHAT_TEST_LOG_LEVEL", "Error"),
                   strictTestLog = env.get("AHAT_TEST_STRICT_LOG", "0") == "1")
