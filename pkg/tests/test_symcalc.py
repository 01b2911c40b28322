from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from algebroids.symcalc import (Chart, ChartError, DiffForm, ParseError, RatFunc, Substitution,
                                VectorField, contract, d, generic_form, generic_polys, lie_bracket,
                                lie_derivative, parse_expr, parse_form, pullback, wedge)
from algebroids.symcalc.generic import generic_vector
from conftest import E, F

CH3 = Chart("R3", ("x1", "x2", "x3"))


# -- parsing -----------------------------------------------------------------------------------

def test_parse_polynomial_has_two_terms(R2):
    f = parse_expr("x1^2 - 1/2*x2", R2)
    assert f.is_polynomial() and len(f.num) == 2


def test_parse_denominator(R2):
    f = parse_expr("1/(1+x1)", R2)
    assert f.den == (R2.one() + R2.var(0)).num
    assert f * (R2.one() + R2.var(0)) == R2.one()


def test_parse_syntax_error_reports_end_of_input(R2):
    with pytest.raises(ParseError) as err:
        parse_expr("x1 +", R2)
    assert err.value.position == 4


def test_parse_unknown_variable(R2):
    with pytest.raises(ParseError):
        parse_expr("x1 + y", R2)


def test_parse_division_by_zero(R2):
    with pytest.raises((ParseError, ZeroDivisionError)):
        parse_expr("x1/(x2 - x2)", R2)


@pytest.mark.parametrize("text", ["x1^2 - 1/2*x2", "1/(1+x1)", "(x1 - x2)^3/(x1*x2 + 7)",
                                  "-3/4", "x1^-2 + x2"])
def test_parse_print_parse_is_fixed_point(R2, text):
    f = parse_expr(text, R2)
    g = parse_expr(str(f), R2)
    assert g == f and str(g) == str(f)


def test_form_print_round_trip(R3):
    w = F("x1*dx2^dx3 - 1/2*dx1^dx3/(1 + x2)", R3)
    assert parse_form(str(w), R3) == w


# -- exterior calculus examples ------------------------------------------------------------------

def test_d_examples(R2):
    assert d(R2.var(0)) == DiffForm.dx(R2, 0)
    assert d(F("x1*dx2", R2)) == F("dx1^dx2", R2)
    assert d(DiffForm.dx(R2, 0)).is_zero()


def test_wedge_examples(R2):
    dx1, dx2 = DiffForm.dx(R2, 0), DiffForm.dx(R2, 1)
    assert wedge(dx1, dx2) == F("dx1^dx2", R2)
    assert wedge(dx1, dx1).is_zero()
    # oracle: dx2^dx1 = -dx1^dx2 by hand
    assert wedge(F("x1*dx2", R2), dx1) == F("-x1*dx1^dx2", R2)


def test_wedge_chart_mismatch(R2, R3):
    with pytest.raises(ChartError):
        wedge(DiffForm.dx(R2, 0), DiffForm.dx(R3, 1))


def test_contract_examples(R3):
    w = F("dx1^dx2", R3)
    assert contract(VectorField.coord(R3, 0), w) == F("dx2", R3)
    assert contract(VectorField.coord(R3, 2), w).is_zero()
    xi = VectorField(R3, [R3.var(1), R3.zero(), R3.zero()])
    assert contract(xi, w) == F("x2*dx2", R3)


def test_contract_of_function_is_an_error(R3):
    with pytest.raises(ValueError):
        contract(VectorField.coord(R3, 0), DiffForm.function(R3.var(0)))


def test_lie_bracket_examples(R2):
    d1, d2 = VectorField.coord(R2, 0), VectorField.coord(R2, 1)
    assert lie_bracket(d1, d2).is_zero()
    x1d2 = VectorField(R2, [R2.zero(), R2.var(0)])
    assert lie_bracket(x1d2, d1) == VectorField(R2, [R2.zero(), -R2.one()])
    x1d1 = VectorField(R2, [R2.var(0), R2.zero()])
    assert lie_bracket(x1d1, x1d1).is_zero()


def test_lie_derivative_examples(R2):
    d1 = VectorField.coord(R2, 0)
    assert lie_derivative(d1, F("x1*dx2", R2)) == F("dx2", R2)
    f = E("x1^2*x2", R2)
    xi = VectorField(R2, [R2.var(1), R2.one()])
    assert lie_derivative(xi, DiffForm.function(f)).as_function() == xi(f)
    assert lie_derivative(d1, F("dx2", R2)).is_zero()


def test_pullback_examples():
    U = Chart("U", ("u",))
    X = Chart("X", ("x",), units=("x",))
    s = Substitution(U, X, {"u": X.var(0).inverse()})
    assert pullback(s, d(U.var(0))) == F("-1/x^2*dx", X)
    ident = Substitution.identity(CH3)
    w = F("x1*dx2 + x3^2*dx1", CH3)
    assert pullback(ident, w) == w
    f = U.var(0) ** 2
    assert pullback(s, d(f)) == d(s.apply(f))


def test_pullback_zero_denominator():
    U = Chart("U", ("u",))
    X = Chart("X", ("x",))
    s = Substitution(U, X, {"u": X.zero()})
    with pytest.raises(ZeroDivisionError):
        s.apply(U.var(0).inverse())


# -- properties --------------------------------------------------------------------------------

def test_d_squared_vanishes_generically():
    for k in range(3):
        _, w = generic_form(CH3, k, 2)
        assert d(d(w)).is_zero()


def test_cartan_identity_generic():
    chart, polys = generic_polys(CH3, 2, 3, prefix="v")
    xi = generic_vector(chart, polys)
    for k in (0, 1, 2, 3):
        wchart, w = generic_form(CH3, k, 2, prefix=f"w{k}_")
        big = CH3.with_params(chart.params + wchart.params)
        xb, wb = VectorField(big, [c.lift(big) for c in xi.comps]), w.lift(big)
        rhs = contract(xb, d(wb))
        if k > 0:
            rhs = rhs + d(contract(xb, wb))
        assert (lie_derivative(xb, wb) - rhs).is_zero()


small_coeff = st.integers(-3, 3)


@st.composite
def forms(draw, degree):
    from itertools import combinations
    terms = {}
    for idx in combinations(range(3), degree):
        a, b, c = draw(small_coeff), draw(small_coeff), draw(small_coeff)
        coeff = CH3.const(a) + CH3.var(0) * b + CH3.var(1) * CH3.var(2) * c
        terms[idx] = coeff
    return DiffForm(CH3, degree, terms)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3).flatmap(lambda p: forms(p)), st.integers(0, 3).flatmap(lambda q: forms(q)),
       st.integers(0, 2).flatmap(lambda r: forms(r)))
def test_wedge_associative_and_graded_commutative(a, b, c):
    assert wedge(a, b) == wedge(b, a).scale((-1) ** (a.degree * b.degree))
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
    assert d(wedge(a, b)) == wedge(d(a), b) + wedge(a, d(b)).scale((-1) ** a.degree)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=4, max_size=4))
def test_canonical_equality(cs):
    a, b, c, e = cs
    x1, x2 = CH3.var(0), CH3.var(1)
    num = x1 * a + x2 * b + c
    den = x1 * x2 + e * e + 1
    f = num / den
    g = (num * (x1 + 2)) / (den * (x1 + 2))
    assert f == g and (f - g).is_zero()
    assert hash(f) == hash(g)


def test_pullback_composition():
    A = Chart("A", ("a1", "a2"))
    B = Chart("B", ("b1", "b2"), units=("b1",))
    C = Chart("C", ("c1", "c2"), units=("c1", "c2"))
    s1 = Substitution(A, B, {"a1": B.var(0).inverse() + B.var(1), "a2": B.var(1) ** 2})
    s2 = Substitution(B, C, {"b1": C.var(0) * C.var(1), "b2": C.var(1) - C.var(0).inverse()})
    w = DiffForm(A, 2, {(0, 1): A.var(0) * A.var(1) + 1})
    v = DiffForm(A, 1, {(0,): A.var(1), (1,): A.var(0) ** 2})
    for form in (w, v, DiffForm.function(A.var(0) / (A.var(1) + 3))):
        assert s1.then(s2).pullback(form) == s2.pullback(s1.pullback(form))
        assert s1.pullback(d(form)) == d(s1.pullback(form))


def test_ratfunc_chart_mismatch_raises(R2, R3):
    with pytest.raises(ChartError):
        R2.var(0) + R3.var(0)
