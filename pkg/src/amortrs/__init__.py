"""Amortised runtime-complexity analysis for typed constructor term rewrite systems."""

from .annot import AnnotatedDecl, AnnotatedSignature, AnnotatedType, ConstructorScheme, ResourceVec, vec
from .engine import KERNEL, bigstep, dheight, rc_oracle, smallstep_closure
from .interp import bound_report, check_orientation, derive_interpretation, interpret_ground
from .potential import check_polyt, phi_ground, phi_value
from .syntax import ParseError, parse_sig, parse_term, parse_trs, print_sig, print_trs
from .terms import App, Rule, Signature, Trs, Var
from .typecheck import DegreeTemplate, check_trs, infer

__version__ = "0.1.0"

__all__ = [
    "AnnotatedDecl", "AnnotatedSignature", "AnnotatedType", "ConstructorScheme", "ResourceVec", "vec",
    "KERNEL", "bigstep", "dheight", "rc_oracle", "smallstep_closure",
    "bound_report", "check_orientation", "derive_interpretation", "interpret_ground",
    "check_polyt", "phi_ground", "phi_value",
    "ParseError", "parse_sig", "parse_term", "parse_trs", "print_sig", "print_trs",
    "App", "Rule", "Signature", "Trs", "Var",
    "DegreeTemplate", "check_trs", "infer",
]
