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

from Utils.Errorhandling import AhatError


class ChannelPlan():
    ''' Reservation of residual channels by name

        Scalar channels and blocks (hash blocks have size 4) are handed out in allocation order,
        so a plan built twice in the same order is identical. Ranges never overlap.
    '''

    def __init__(self):
        self.__ranges = {}
        self.__order  = []
        self.width    = 0
        self.nodes    = {}      # subformula text -> channel of its sign

    def __contains__(self, name):
        return name in self.__ranges

    def __allocate(self, name, size):
        if name in self.__ranges:
            raise AhatError("plan", "duplicate_channel", f"channel '{name}' allocated twice")
        start = self.width
        self.__ranges[name] = (start, size)
        self.__order.append(name)
        self.width += size
        return start

    def scalar(self, name):
        return self.__allocate(name, 1)

    def block(self, name, size=4):
        start = self.__allocate(name, size)
        return tuple(range(start, start + size))

    def reserve(self, name, size):
        # unused channels, they keep their zero embedding forever
        if size > 0:
            self.__allocate(name, size)

    def get(self, name):
        start, size = self.__ranges[name]
        return start if size == 1 else tuple(range(start, start + size))

    def ranges(self):
        return [(name,) + self.__ranges[name] for name in self.__order]

    def names(self):
        # one name per channel: "name" for scalars and "name[i]" inside blocks
        result = []
        for name in self.__order:
            _, size = self.__ranges[name]
            result += [name] if size == 1 else [f"{name}[{i}]" for i in range(size)]
        return tuple(result)

    def toDocument(self):
        return {"width": self.width,
                "channels": {name: [start, size] for name, start, size in self.ranges()},
                "nodes": dict(self.nodes)}

    def dumps(self):
        return json.dumps(self.toDocument(), indent=1, ensure_ascii=False)
