"""Bell inequalities tailored to the Z_d toric code."""

from .bellexpr import BellExpression, build_expression, local_bound_formulas, quantum_bound, ratio
from .lattice import SpecialSiteSet, TorusLattice, place_special_sites, validate_special_sites
from .localbound import (
    assemble_extremal_strategy,
    brute_force,
    certify_special_tile,
    evaluate,
    random_search,
    saturating_strategy,
)
from .pauli import WeylWord
from .quantum import bell_expectation, ground_state_group, verify_sos

__all__ = [
    "BellExpression",
    "SpecialSiteSet",
    "TorusLattice",
    "WeylWord",
    "assemble_extremal_strategy",
    "bell_expectation",
    "brute_force",
    "build_expression",
    "certify_special_tile",
    "evaluate",
    "ground_state_group",
    "local_bound_formulas",
    "place_special_sites",
    "quantum_bound",
    "random_search",
    "ratio",
    "saturating_strategy",
    "validate_special_sites",
    "verify_sos",
]
