from Compiler.Plan import ChannelPlan
from Compiler.Builder import Construction, Read, form
from Compiler.Assignment import assignment_index, assignment_tuple
from Compiler.Compile import compile, CompiledArtifact, FormulaCompiler, DEPTH_SLOPE, DEPTH_OFFSET
