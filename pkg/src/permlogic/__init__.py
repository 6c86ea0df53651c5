"""Decision procedures for two-variable logic over permutations with two successor relations."""

from .logic import eval_formula, parse_formula, to_snf, to_text
from .perm import LabeledPermutation, ValuedPermutation
from .rlp import RlpInstance, solve_rlp, verify_witness
from .sat import decide_sat

__all__ = ["LabeledPermutation", "RlpInstance", "ValuedPermutation", "decide_sat", "eval_formula",
           "parse_formula", "solve_rlp", "to_snf", "to_text", "verify_witness"]
