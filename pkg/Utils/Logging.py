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

import logging

TRACE = 5
logging.addLevelName(TRACE, "TRACE")

LogFormat = "[%(levelname)8s] %(name)25s:   %(message)s"

__levels = {
    "Error": logging.ERROR,
    "Warn":  logging.WARN,
    "Info":  logging.INFO,
    "Debug": logging.DEBUG,
    "Trace": TRACE,
}


def levelFromName(name: str):
    #unknown names fall back to warnings, as the environment is user controlled
    return __levels.get(name, logging.WARN)


def setupLogging(level="Warn"):

    if isinstance(level, str):
        level = levelFromName(level)

    logging.basicConfig(format=LogFormat)
    logging.getLogger().setLevel(level)


class ErrorFilter(logging.Filter):
    #Logging filter that raises exception when Error occurs

    def filter(self, record):
        if record.levelname == "ERROR":
            raise Exception(f"Error was logged for {record.name}: {record.getMessage()}")

        return True
