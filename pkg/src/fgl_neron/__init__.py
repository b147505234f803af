"""Formal group laws of Neron models of tori, computed by exact truncation."""

from .arith import cyclotomic_ring, quadratic_ring
from .formal_group import FormalGroupLaw, check_axioms, from_logarithm, logarithm
from .lattice import SpecError, TorusSpec, parse_spec
from .pipeline import compute, global_completion, local_completion, quadratic_completion, verify_report

__all__ = [
    "FormalGroupLaw",
    "SpecError",
    "TorusSpec",
    "check_axioms",
    "compute",
    "cyclotomic_ring",
    "from_logarithm",
    "global_completion",
    "local_completion",
    "logarithm",
    "parse_spec",
    "quadratic_completion",
    "quadratic_ring",
    "verify_report",
]

__version__ = "0.1.0"
