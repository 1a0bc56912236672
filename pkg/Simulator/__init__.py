from Simulator.Prenorm import layer_norm, masked_prenorm, ln_hash, hashDot, decodeHash
from Simulator.Attention import ahat_attention, HeadRecord
from Simulator.Gadgets import gadget_apply
from Simulator.Trace import Trace, SublayerRecord, exportTrace, writeTrace, channelSelection
from Simulator.Runner import Simulator, PaddedInput, RunState, RunResult, run, resume, start, tokenize
