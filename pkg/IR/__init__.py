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

# The transformer intermediate representation and its file formats

from IR.Matrix import Matrix
from IR.Transformer import (TransformerIR, Blocks, Attention, FeedForward, Gadget, Head, Loop, Padding, Readout,
                            AffineTerm, AffineSource, Mask, PositionEncoding, GadgetKind, DecisionRule, BOS, BLANK)
from IR.Serialize import serialize, deserialize, serialize_binary, deserialize_binary, to_document, from_document, load, dump
from IR.Validate import validate, validateOrRaise, ReportEntry
from IR.Depth import unroll_depth, parallel_depth, sublayer_count, ceilLog2
