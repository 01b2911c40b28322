"""Generic-element axiom suites.

A structure exposes ``chart``, ``nslots`` (polynomial slots per element),
``element(polys)``, ``over(chart)`` (the same structure with data lifted to
a parameter-extended chart) and the operations ``bracket``, ``pair``,
``anchor``, ``act`` (the module action ``f.q`` or ``f*v``) and ``partial``.

Every argument of an identity is instantiated with fresh symbolic
coefficients on all monomials of degree <= D.  Because each identity is
additive in each argument, ``slice_last=True`` replaces the last element
argument by each basis element in turn, which trades one big expansion for
many small ones without weakening the proof.

Quasi-associativity is checked as ``f*(g*v) - (fg)*v = pi(v)(f)*dg + pi(v)(g)*df``.
With the opposite sign the pairing axiom and ``<v, df> = pi(v)(f)`` force
``<x*(x*e), e> = <x*(x*e), e> - 4`` for any ``e`` with ``pi(e) = d/dx``, so no
model with a nonzero anchor exists; the sign used here is the one realized
by normal-ordered products in the beta-gamma system.
"""

from __future__ import annotations

from .report import Report
from .symcalc import GenericSpace, lie_bracket
from .symcalc.generic import monomial, monomials

COURANT_AXIOMS = ("leibniz", "ip-invar", "bracket-o-courant", "ip-o", "ip-symm")
STRUCTURE_CHECKS = ("jacobi", "anchor-hom", "anchor-partial")
VERTEX_AXIOMS = ("assoc", "leib", "symm-bracket", "anchor-lin", "pairing", "pairing-inv",
                 "deriv", "bracket-o", "pairing-o")


class Instance:
    """Generic elements and functions realized over one extended chart."""

    def __init__(self, S, degree, n_elements, n_functions):
        space = GenericSpace(S.chart, degree, prefix="c")
        slots = [space.reserve(S.nslots) for _ in range(n_elements)]
        fslots = [space.reserve(1) for _ in range(n_functions)]
        chart, polys = space.realize()
        self.chart = chart
        self.S = S.over(chart)
        self.elements = [self.S.element([polys[k] for k in s]) for s in slots]
        self.functions = [polys[s[0]] for s in fslots]


def basis_elements(S, degree, chart=None):
    """``(label, element)`` for each slot and monomial of degree <= ``degree``."""
    chart = chart or S.chart
    T = S.over(chart)
    monos = monomials(chart.n, degree)
    out = []
    for slot in range(S.nslots):
        for e in monos:
            polys = [chart.zero()] * S.nslots
            polys[slot] = monomial(chart, e)
            label = f"slot {slot} * x^{e}"
            out.append((label, T.element(polys)))
    return out


def _run(rep, name, fn, sliced):
    """Evaluate ``fn(last)`` for each basis element (or once with ``None``)."""
    if sliced is None:
        rep.add(name, fn(None))
        return
    for label, e in sliced:
        res = fn(e)
        if not _zero(res):
            rep.add(name, res, witness=label)
            return
    rep.add(name, True)


def _zero(x):
    if isinstance(x, (list, tuple)):
        return all(_zero(v) for v in x)
    return x.is_zero()


def courant_suite(S, degree, title, slice_last=False, structure=True):
    """The five Courant axioms (plus structural checks) on generic elements."""
    rep = Report(title)
    rep.data["degree_bound"] = degree
    inst = Instance(S, degree, 3, 1)
    T = inst.S
    q1, q2, q3 = inst.elements
    f = inst.functions[0]
    sliced = basis_elements(S, degree, inst.chart) if slice_last else None

    def last(e, default):
        return default if e is None else e

    _run(rep, "leibniz",
         lambda e: (lambda b: T.bracket(q1, T.act(f, b)) - T.act(f, T.bracket(q1, b))
                    - T.act(T.anchor(q1)(f), b))(last(e, q2)), sliced)
    _run(rep, "ip-invar",
         lambda e: (lambda b: T.pair(T.bracket(q1, q2), b) + T.pair(q2, T.bracket(q1, b))
                    - T.anchor(q1)(T.pair(q2, b)))(last(e, q3)), sliced)
    rep.add("bracket-o-courant", T.bracket(q1, T.partial(f)) - T.partial(T.anchor(q1)(f)))
    rep.add("ip-o", T.pair(q1, T.partial(f)) - T.anchor(q1)(f))
    _run(rep, "ip-symm",
         lambda e: (lambda b: T.bracket(q1, b) + T.bracket(b, q1)
                    - T.partial(T.pair(q1, b)))(last(e, q2)), sliced)
    if structure:
        _run(rep, "jacobi",
             lambda e: (lambda c: T.bracket(q1, T.bracket(q2, c)) - T.bracket(T.bracket(q1, q2), c)
                        - T.bracket(q2, T.bracket(q1, c)))(last(e, q3)), sliced)
        _run(rep, "anchor-hom",
             lambda e: (lambda b: T.anchor(T.bracket(q1, b))
                        - lie_bracket(T.anchor(q1), T.anchor(b)))(last(e, q2)), sliced)
        rep.add("anchor-partial", T.anchor(T.partial(f)))
    return rep


def vertex_suite(V, degree, title, slice_last=False, structure=True):
    """The nine vertex algebroid axioms (plus structural checks) on generic elements."""
    rep = Report(title)
    rep.data["degree_bound"] = degree
    inst = Instance(V, degree, 3, 2)
    T = inst.S
    v, v1, v2 = inst.elements
    f, g = inst.functions
    sliced = basis_elements(V, degree, inst.chart) if slice_last else None

    def last(e, default):
        return default if e is None else e

    def pi(x):
        return T.anchor(x)

    _run(rep, "assoc",
         lambda e: (lambda w: T.act(f, T.act(g, w)) - T.act(f * g, w)
                    - T.act(pi(w)(f), T.partial(g)) - T.act(pi(w)(g), T.partial(f)))(last(e, v)),
         sliced)
    _run(rep, "leib",
         lambda e: (lambda w: T.bracket(v1, T.act(f, w)) - T.act(pi(v1)(f), w)
                    - T.act(f, T.bracket(v1, w)))(last(e, v2)), sliced)
    _run(rep, "symm-bracket",
         lambda e: (lambda w: T.bracket(v1, w) + T.bracket(w, v1)
                    - T.partial(T.pair(v1, w)))(last(e, v2)), sliced)
    rep.add("anchor-lin", pi(T.act(f, v)) - pi(v).scale(f))
    _run(rep, "pairing",
         lambda e: (lambda w: T.pair(T.act(f, v1), w) - f * T.pair(v1, w)
                    + pi(v1)(pi(w)(f)))(last(e, v2)), sliced)
    _run(rep, "pairing-inv",
         lambda e: (lambda w: pi(v)(T.pair(v1, w)) - T.pair(T.bracket(v, v1), w)
                    - T.pair(v1, T.bracket(v, w)))(last(e, v2)), sliced)
    rep.add("deriv", T.partial(f * g) - T.act(f, T.partial(g)) - T.act(g, T.partial(f)))
    rep.add("bracket-o", T.bracket(v, T.partial(f)) - T.partial(pi(v)(f)))
    rep.add("pairing-o", T.pair(v, T.partial(f)) - pi(v)(f))
    if structure:
        _run(rep, "jacobi",
             lambda e: (lambda w: T.bracket(v, T.bracket(v1, w)) - T.bracket(T.bracket(v, v1), w)
                        - T.bracket(v1, T.bracket(v, w)))(last(e, v2)), sliced)
        _run(rep, "anchor-hom",
             lambda e: (lambda w: pi(T.bracket(v1, w)) - lie_bracket(pi(v1), pi(w)))(last(e, v2)),
             sliced)
        rep.add("anchor-partial", pi(T.partial(f)))
        rep.add("unit", T.act(inst.chart.one(), v) - v)
    return rep


def axiom_failures(rep, names):
    """Names among ``names`` whose check failed."""
    return [c.name for c in rep.checks if c.name in names and not c.passed]
