"""Generic elements: fresh coefficient symbols times all bounded-degree monomials.

An identity that holds for a generic element of degree <= D holds for every
element of degree <= D, so a single symbolic evaluation is a bounded proof.
Parameter names are deterministic (``<prefix><slot>_<monomial>``).
"""

from __future__ import annotations

from itertools import combinations_with_replacement

from .forms import DiffForm, VectorField, d
from .ratfunc import RatFunc


def monomials(n, degree):
    """Exponent vectors of total degree <= ``degree`` in ``n`` variables.

    Ordered by total degree, then lexicographically with x1 highest.
    """
    out = []
    for k in range(degree + 1):
        level = []
        for combo in combinations_with_replacement(range(n), k):
            e = [0] * n
            for i in combo:
                e[i] += 1
            level.append(tuple(e))
        level.sort(reverse=True)
        out.extend(level)
    return out


def monomial(chart, exps):
    """The monomial ``prod x_i^e_i`` (negative exponents allowed)."""
    f = chart.one()
    for i, e in enumerate(exps):
        if e:
            f = f * chart.var(i) ** e
    return f


class GenericSpace:
    """Allocates generic polynomials on a chart.

    Usage: reserve slots first, then call :meth:`realize` once to obtain the
    parameter-extended chart and the polynomials.
    """

    def __init__(self, chart, degree, prefix="c"):
        self.base = chart
        self.degree = degree
        self.prefix = prefix
        self.monos = monomials(chart.n, degree)
        self.count = 0

    def reserve(self, k=1):
        start = self.count
        self.count += k
        return list(range(start, start + k))

    def param_names(self):
        return [f"{self.prefix}{s}_{m}" for s in range(self.count)
                for m in range(len(self.monos))]

    def realize(self):
        chart = self.base.with_params(self.param_names())
        mono_vals = [monomial(chart, e) for e in self.monos]
        polys = []
        for s in range(self.count):
            f = chart.zero()
            for m, mv in enumerate(mono_vals):
                f = f + chart.symbol(f"{self.prefix}{s}_{m}") * mv
            polys.append(f)
        return chart, polys


def generic_polys(chart, degree, count, prefix="c"):
    """Return ``(extended_chart, [count generic polynomials])``."""
    space = GenericSpace(chart, degree, prefix)
    space.reserve(count)
    return space.realize()


def forms_from(chart, degree, polys):
    """Assemble a degree-``degree`` form from consecutive coefficient polys."""
    from itertools import combinations
    idxs = list(combinations(range(chart.n), degree))
    return DiffForm(chart, degree, dict(zip(idxs, polys)))


def form_slots(n, degree):
    from math import comb
    return comb(n, degree)


def generic_form(chart, form_degree, degree, prefix="c"):
    """A generic ``form_degree``-form with coefficients of degree <= ``degree``."""
    k = form_slots(chart.n, form_degree)
    ext, polys = generic_polys(chart, degree, k, prefix)
    return ext, forms_from(ext, form_degree, polys)


def generic_closed_form(chart, form_degree, degree, prefix="h"):
    """A generic closed form: ``d`` of a generic form one degree up in coefficients.

    On a chart every closed polynomial form of coefficient degree <= D is the
    differential of a polynomial form of coefficient degree <= D + 1.
    """
    ext, pot = generic_form(chart, form_degree - 1, degree + 1, prefix)
    return ext, d(pot)


def basis_polys(chart, degree):
    """Monomials of degree <= ``degree`` as RatFuncs (the slicing basis)."""
    return [monomial(chart, e) for e in monomials(chart.n, degree)]


def generic_vector(chart, polys):
    return VectorField(chart, polys)


__all__ = [
    "GenericSpace", "basis_polys", "forms_from", "form_slots", "generic_closed_form",
    "generic_form", "generic_polys", "generic_vector", "monomial", "monomials",
]
