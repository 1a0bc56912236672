# Reductions as tokenwise functions and the stacking of recognizers on top of them

from Reduce.Reduction import (Reduction, BinaryIndex, REDUCTIONS, reduction, binary_index, bit_width, apply_reduction,
                              membership_R)
from Reduce.Transformers import build_reduction_transformer, reduction_input, ReductionBuilder
from Reduce.Stack import stack, StackBounds, Stacker
