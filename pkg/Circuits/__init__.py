# Threshold circuits: text format, direct evaluation, composition and the looped evaluator

from Circuits.Circuit import (Circuit, Gate, GateKind, GateState, parse_circuit, serialize_circuit, check_circuit,
                              topological_order, reorder, output_last, sinks)
from Circuits.Evaluate import eval_circuit, eval_outputs, gate_values, gate_depths, depth, size, is_wide_witness, bits
from Circuits.Compose import compose_serial, compose_parallel, compose_recurrent
from Circuits.Evaluator import build_circuit_evaluator, encode_instance, evaluate_instance, gate_positions, EvaluatorBuilder, Tokens
