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

from enum import Enum, auto

# error classes:
class ErrorClass(Enum):
    internal = auto()
    domain = auto()
    validation = auto()
    syntax = auto()
    usage = auto()
    none = auto()

# frequently used reasons
Nested_Radical = "nested_radical"
Zero_Divisor   = "zero_divisor"
Out_Of_Range   = "out_of_range"


def errorUri(errclass: ErrorClass, source: str, reason: str):
    return f"ahat.error.{errclass.name}.{source}.{reason}"


class AhatError(Exception):
    ''' Base of all errors raised by the toolkit

        Every error carries an uri of the form "ahat.error.<class>.<source>.<reason>" in its
        "error" attribute, which allows callers to dispatch without parsing messages.
    '''

    errclass = ErrorClass.internal

    def __init__(self, source: str, reason: str, message: str):
        super().__init__(message)
        self.error   = errorUri(self.errclass, source, reason)
        self.source  = source
        self.reason  = reason
        self.message = message

    def __str__(self):
        return f"{self.message} ({self.error})"


class DomainError(AhatError):
    #input is outside the exact domain an operation is defined on
    errclass = ErrorClass.domain


class ValidationError(AhatError):
    errclass = ErrorClass.validation

    def __init__(self, source: str, reason: str, message: str, report=None):
        super().__init__(source, reason, message)
        self.report = list(report or [])


class ParseError(AhatError):
    errclass = ErrorClass.syntax

    def __init__(self, source: str, reason: str, message: str, location=None):
        if location is not None:
            message = f"{message} at {location}"
        super().__init__(source, reason, message)
        self.location = location


class UsageError(AhatError):
    errclass = ErrorClass.usage


def isAhatError(error, errclass: ErrorClass=ErrorClass.none, source: str=None, reason: str=None):
    # accepts exceptions carrying an uri as well as plain uri strings

    if isinstance(error, str):
        uri = error
    elif hasattr(error, "error"):
        uri = error.error
    else:
        return False

    if not uri.startswith("ahat.error"):
        return False

    comps = uri.split(".")
    if len(comps) != 5:
        return False

    if errclass != ErrorClass.none and comps[2] != errclass.name:
        return False

    if source and comps[3] != source:
        return False

    if reason and comps[4] != reason:
        return False

    return True
