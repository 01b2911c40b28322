"""Exact exterior calculus over rational-function charts."""

from .forms import DiffForm, VectorField, contract, d, evaluate, iota2, lie_bracket, lie_derivative, wedge
from .generic import (GenericSpace, basis_polys, forms_from, generic_closed_form, generic_form,
                      generic_polys, monomial, monomials)
from .parse import ParseError, parse_expr, parse_form
from .ratfunc import Chart, ChartError, RatFunc
from .subst import Substitution, pullback

__all__ = [
    "Chart", "ChartError", "DiffForm", "GenericSpace", "ParseError", "RatFunc", "Substitution",
    "VectorField", "basis_polys", "contract", "d", "evaluate", "forms_from", "generic_closed_form",
    "generic_form", "generic_polys", "iota2", "lie_bracket", "lie_derivative", "monomial",
    "monomials", "parse_expr", "parse_form", "pullback", "wedge",
]
