# Conversion of unmasked attention into causally masked attention

from Masking.Dominance import choose_dominance_constant, score_bound
from Masking.Convert import to_causal, convert_report, unmasked_layers, MaskConverter
