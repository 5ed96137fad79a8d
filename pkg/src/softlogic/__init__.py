"""Weighted fuzzy logic engine with MLN and PSL as special cases."""

from .formula import (
    Atom,
    Bin,
    Connective,
    Const,
    Literal,
    Neg,
    OperatorKind,
    apply_operator,
    complement,
    decompose_rule,
    is_psl_rule,
)
from .logics import (
    DensityReport,
    Flavor,
    Program,
    WeightedFormula,
    density,
    gpsl_distance,
    mln_probability,
    mln_weight,
    normalize,
    psl_distance,
    total_weight,
)
from .parser import ParseError, parse_formula, parse_program, print_formula, print_program
from .semantics import Interpretation, enumerate_boolean, evaluate, is_boolean, satisfies
from .transform import check_equivalence, fuzzify, mln_to_gpsl, rewrite_rule
from .inference import estimate_marginal, map_boolean, map_continuous, map_via_crispification

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "Bin",
    "Connective",
    "Const",
    "Literal",
    "Neg",
    "OperatorKind",
    "apply_operator",
    "complement",
    "decompose_rule",
    "is_psl_rule",
    "DensityReport",
    "Flavor",
    "Program",
    "WeightedFormula",
    "density",
    "gpsl_distance",
    "mln_probability",
    "mln_weight",
    "normalize",
    "psl_distance",
    "total_weight",
    "ParseError",
    "parse_formula",
    "parse_program",
    "print_formula",
    "print_program",
    "Interpretation",
    "enumerate_boolean",
    "evaluate",
    "is_boolean",
    "satisfies",
    "check_equivalence",
    "fuzzify",
    "mln_to_gpsl",
    "rewrite_rule",
    "estimate_marginal",
    "map_boolean",
    "map_continuous",
    "map_via_crispification",
]
