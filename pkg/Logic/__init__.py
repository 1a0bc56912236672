from Logic.Formula import (One, N, Var, QSigma, Eq, Leq, Geq, Bit, And, Or, Not, Exists, Forall, Maj2,
                           free_variables, is_sentence, formula_metrics, serialize_formula, walk)
from Logic.Parser import parse_formula
from Logic.Evaluate import eval_formula, enumerate_language, words
