from fractions import Fraction
from itertools import permutations

import pytest

from algebroids.liestruct import (GForm, LieAlgebraSpec, LieSpecError, atiyah_cotangent, builtin, gbracket,
                                  gl, gl1, gpair, maurer_cartan_form, mc_residual, pointwise_triple, sl2,
                                  triple, validate_lie, zero_lie)
from algebroids.symcalc import DiffForm, d
from conftest import F
from helpers import generic_gforms, symbolic_pure_gauge


def gf(chart, lie, **comps):
    return GForm.from_terms(chart, lie, 1, [(F(t, chart, 1), b) for b, t in comps.items()])


def test_validate_examples():
    assert validate_lie(gl1()).passed
    assert validate_lie(sl2()).passed
    assert validate_lie(zero_lie()).passed
    s = sl2()
    bad = LieAlgebraSpec.from_sparse("bad", s.basis, [(0, 1, {1: 2}), (0, 2, {2: -2}), (1, 2, {1: 1})],
                                     s.gram)
    rep = validate_lie(bad)
    assert rep.get("jacobi").passed is False
    assert rep.get("jacobi").witness == "(H, E, F)"


def test_sl2_trace_form():
    s = sl2()
    H, E, F_ = (s.basis.index(n) for n in "HEF")
    assert s.gram[H][H] == 2 and s.gram[E][F_] == 1 and s.gram[E][E] == 0


def test_validate_dimension_mismatch():
    with pytest.raises(LieSpecError):
        LieAlgebraSpec.from_sparse("x", ("a", "b"), [], [[1]])


def test_builtin_names():
    assert builtin("gl1").basis == ("e",)
    assert builtin("gl2").dim == 4
    assert builtin("atiyah-cotangent", 2).gram == atiyah_cotangent(2).gram
    with pytest.raises(LieSpecError):
        builtin("e8")


def test_gbracket_examples(R3):
    assert gbracket(gf(R3, gl1(), e="x1*dx2"), gf(R3, gl1(), e="dx3")).is_zero()
    s = sl2()
    out = gbracket(gf(R3, s, E="dx1"), gf(R3, s, F="dx2"))
    assert out == GForm.from_terms(R3, s, 2, [(F("dx1^dx2", R3), "H")])
    A = gf(R3, s, E="dx1")
    assert gbracket(A, A).is_zero()


def test_gpair_examples(R3):
    s = sl2()
    assert gpair(gf(R3, s, E="dx1"), gf(R3, s, F="dx2")) == F("dx1^dx2", R3)
    A = gf(R3, s, E="x2*dx1 + dx3", H="x1*dx2", F="dx1")
    assert gpair(A, A).is_zero()
    g = gl1()
    assert gpair(gf(R3, g, e="x1*dx1"), gf(R3, g, e="x2*dx2")) == F("x1*x2*dx1^dx2", R3)


def test_mc_examples(R3):
    s = sl2()
    assert mc_residual(gf(R3, s, E="dx1")).is_zero()
    g2 = gl(2)
    one, zero, x1 = R3.one(), R3.zero(), R3.var(0)
    a = maurer_cartan_form([[one, x1], [zero, one]], g2, R3)
    assert a == gf(R3, g2, E12="dx1")
    assert mc_residual(a).is_zero()
    assert mc_residual(gf(R3, s, E="x1*dx2")) == GForm.from_terms(R3, s, 2, [(F("dx1^dx2", R3), "E")])


def _trace_oracle():
    """``sum_sigma sign(sigma) tr(X_s1 [X_s2, X_s3])`` over 2x2 matrices for (E, F, H)."""
    E = [[0, 1], [0, 0]]
    Fm = [[0, 0], [1, 0]]
    H = [[1, 0], [0, -1]]

    def mul(a, b):
        return [[sum(Fraction(a[i][k]) * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)]

    def comm(a, b):
        ab, ba = mul(a, b), mul(b, a)
        return [[ab[i][j] - ba[i][j] for j in range(2)] for i in range(2)]

    mats = [E, Fm, H]
    total = Fraction(0)
    for perm in permutations(range(3)):
        sign = 1
        for i in range(3):
            for j in range(i + 1, 3):
                if perm[i] > perm[j]:
                    sign = -sign
        m = mul(mats[perm[0]], comm(mats[perm[1]], mats[perm[2]]))
        total += sign * (m[0][0] + m[1][1])
    return total


def test_triple_examples(R3):
    assert triple(gf(R3, gl1(), e="x1*dx2 + dx3")).is_zero()
    s = sl2()
    assert triple(gf(R3, s, E="dx1", F="dx2")).is_zero()
    T = triple(gf(R3, s, E="dx1", F="dx2", H="dx3"))
    # independent oracle: brute force over permutations with matrix traces
    assert T == F("dx1^dx2^dx3", R3).scale(_trace_oracle())
    assert T == F("12*dx1^dx2^dx3", R3)
    assert pointwise_triple(gf(R3, s, E="dx1", F="dx2", H="dx3")) == F("2*dx1^dx2^dx3", R3)


def test_triple_needs_one_form(R3):
    with pytest.raises(ValueError):
        triple(GForm.zero(R3, sl2(), 2))


def test_triple_of_symbolic_pure_gauge_is_closed(R3):
    ext, a = symbolic_pure_gauge(R3, sl2())
    assert mc_residual(a).is_zero()
    T = triple(a)
    assert not T.is_zero()
    assert d(T).is_zero()


def test_ad_invariance_lifted_to_forms(R3):
    s = sl2()
    ext, (C, A, B) = generic_gforms(R3, s, [0, 1, 2], degree=1)
    lhs = gpair(gbracket(C, A), B) + gpair(A, gbracket(C, B))
    assert lhs.is_zero()


def test_graded_jacobi(R3):
    s = sl2()
    ext, (A, B, C) = generic_gforms(R3, s, [1, 1, 0], degree=1)
    # [A, [B, C]] = [[A, B], C] + (-1)^{|A||B|} [B, [A, C]]
    lhs = gbracket(A, gbracket(B, C))
    rhs = gbracket(gbracket(A, B), C) - gbracket(B, gbracket(A, C))
    assert (lhs - rhs).is_zero()


def test_graded_symmetry(R3):
    # [A, B] = -(-1)^{|A||B|} [B, A]
    ext, (A, B) = generic_gforms(R3, sl2(), [1, 2], degree=1)
    assert (gbracket(A, B) + gbracket(B, A)).is_zero()
    ext, (A, B) = generic_gforms(R3, sl2(), [1, 1], degree=1)
    assert (gbracket(A, B) - gbracket(B, A)).is_zero()
    assert (gpair(A, B) + gpair(B, A)).is_zero()


def test_gform_structure_mismatch(R3):
    with pytest.raises(LieSpecError):
        gbracket(gf(R3, sl2(), E="dx1"), gf(R3, gl1(), e="dx1"))
