"""Lie algebras with invariant pairings and Lie-algebra-valued forms.

Conventions for g-valued forms::

    [alpha (x) a, beta (x) b]  = (alpha ^ beta) (x) [a, b]
    <alpha (x) a ^ beta (x) b> = (alpha ^ beta) <a, b>

so for 1-forms ``<A ^ B> = -<B ^ A>`` and ``triple(A) = <A ^ [A, A]>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .report import Report
from .symcalc import DiffForm, RatFunc, contract, d, wedge
from .symcalc.ratfunc import ChartError


class LieSpecError(ValueError):
    """Malformed Lie algebra data (shape errors, invalid identities)."""


class MaurerCartanError(ValueError):
    """A gauge form does not satisfy the Maurer-Cartan equation."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Structure constants ``[e_i, e_j] = sum_k structure[i][j][k] e_k`` and a gram matrix.

    ``matrices`` optionally realizes each basis vector as a square matrix of
    rationals; it is used to convert matrix-valued data (pure gauges,
    transition functions) into basis coordinates.
    """

    name: str
    basis: tuple
    structure: tuple
    gram: tuple
    matrices: tuple = ()

    def __post_init__(self):
        r = len(self.basis)
        if len(set(self.basis)) != r:
            raise LieSpecError("repeated basis names")
        if len(self.structure) != r or any(len(row) != r or any(len(v) != r for v in row)
                                           for row in self.structure):
            raise LieSpecError(f"structure constants must be {r}x{r}x{r}")
        if len(self.gram) != r or any(len(row) != r for row in self.gram):
            raise LieSpecError(f"gram must be {r}x{r}")
        if self.matrices and len(self.matrices) != r:
            raise LieSpecError("one matrix per basis vector required")

    @classmethod
    def from_sparse(cls, name, basis, brackets, gram, matrices=()):
        """Build from ``[(i, j, {k: c})]`` entries; missing ``[e_j, e_i]`` are filled in by antisymmetry."""
        r = len(basis)
        table = [[[Fraction(0)] * r for _ in range(r)] for _ in range(r)]
        given = set()
        for i, j, out in brackets:
            given.add((i, j))
            for k, c in out.items():
                table[i][j][k] = _frac(c)
        for i, j in list(given):
            if (j, i) not in given:
                for k in range(r):
                    table[j][i][k] = -table[i][j][k]
        gram = tuple(tuple(_frac(x) for x in row) for row in gram)
        structure = tuple(tuple(tuple(v) for v in row) for row in table)
        mats = tuple(tuple(tuple(_frac(x) for x in row) for row in m) for m in matrices)
        return cls(name, tuple(basis), structure, gram, mats)

    @property
    def dim(self):
        return len(self.basis)

    def bracket_coords(self, a, b):
        """Bracket of coordinate vectors (any ring supporting * by Fraction)."""
        r = self.dim
        out = [None] * r
        for i in range(r):
            if _is_zero(a[i]):
                continue
            for j in range(r):
                if _is_zero(b[j]):
                    continue
                prod = a[i] * b[j]
                for k in range(r):
                    c = self.structure[i][j][k]
                    if c:
                        term = prod * c
                        out[k] = term if out[k] is None else out[k] + term
        return out

    def pair_coords(self, a, b):
        out = None
        for i in range(self.dim):
            for j in range(self.dim):
                g = self.gram[i][j]
                if g and not _is_zero(a[i]) and not _is_zero(b[j]):
                    term = a[i] * b[j] * g
                    out = term if out is None else out + term
        return out

    def scaled(self, lam):
        """Same algebra with the gram multiplied by ``lam``."""
        lam = _frac(lam)
        gram = tuple(tuple(g * lam for g in row) for row in self.gram)
        return LieAlgebraSpec(f"{self.name}*{lam}", self.basis, self.structure, gram, self.matrices)

    def with_gram(self, gram, name=None):
        gram = tuple(tuple(_frac(x) for x in row) for row in gram)
        return LieAlgebraSpec(name or self.name, self.basis, self.structure, gram, self.matrices)

    # -- matrix realization --------------------------------------------------------
    def matrix_size(self):
        if not self.matrices:
            raise LieSpecError(f"{self.name} has no matrix realization")
        return len(self.matrices[0])

    def coords_of_matrix(self, entries, zero):
        """Basis coordinates of a matrix whose entries lie in a vector space.

        Uses the Frobenius inner product to build a dual basis, then checks the
        reconstruction so that matrices outside the span are rejected.
        """
        m = self.matrix_size()
        dual = _frobenius_dual(self.matrices)
        coords = []
        for k in range(self.dim):
            acc = zero
            for p in range(m):
                for q in range(m):
                    w = dual[k][p][q]
                    if w:
                        acc = acc + entries[p][q] * w
            coords.append(acc)
        back = self.matrix_of_coords(coords, zero)
        for p in range(m):
            for q in range(m):
                if not (back[p][q] - entries[p][q]).is_zero():
                    raise LieSpecError(f"matrix is not in {self.name}")
        return coords

    def matrix_of_coords(self, coords, zero):
        m = self.matrix_size()
        out = [[zero for _ in range(m)] for _ in range(m)]
        for k, c in enumerate(coords):
            if _is_zero(c):
                continue
            for p in range(m):
                for q in range(m):
                    v = self.matrices[k][p][q]
                    if v:
                        out[p][q] = out[p][q] + c * v
        return out


def _is_zero(x):
    if x is None:
        return True
    if isinstance(x, (int, Fraction)):
        return x == 0
    return x.is_zero()


def _frobenius_dual(mats):
    """Matrices D_k with sum_pq D_k[p][q] * M_l[p][q] = delta_kl."""
    r = len(mats)
    m = len(mats[0])
    gram = [[sum(mats[k][p][q] * mats[l][p][q] for p in range(m) for q in range(m))
             for l in range(r)] for k in range(r)]
    inv = _invert(gram)
    return [[[sum(inv[k][l] * mats[l][p][q] for l in range(r)) for q in range(m)]
             for p in range(m)] for k in range(r)]


def _invert(mat):
    n = len(mat)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise LieSpecError("basis matrices are linearly dependent")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# -- standard algebras --------------------------------------------------------------

def zero_lie():
    """The zero Lie algebra; exact structures are extensions by it."""
    return LieAlgebraSpec("0", (), (), ())


def gl1():
    return LieAlgebraSpec.from_sparse("gl1", ("e",), [], [[1]], matrices=[[[1]]])


def sl2():
    """sl2 with basis (H, E, F) and the trace form of the fundamental representation."""
    H, E, F = 0, 1, 2
    brackets = [(H, E, {E: 2}), (H, F, {F: -2}), (E, F, {H: 1})]
    gram = [[2, 0, 0], [0, 0, 1], [0, 1, 0]]
    mats = [[[1, 0], [0, -1]], [[0, 1], [0, 0]], [[0, 0], [1, 0]]]
    return LieAlgebraSpec.from_sparse("sl2", ("H", "E", "F"), brackets, gram, mats)


def gl(n, sign=1, name=None, labels=None):
    """gl_n on matrix units ``E_ij`` with ``sign`` times the trace form."""
    basis = []
    index = {}
    for i in range(n):
        for j in range(n):
            index[(i, j)] = len(basis)
            basis.append(labels(i, j) if labels else f"E{i + 1}{j + 1}")
    r = n * n
    brackets = []
    for (i, j), a in index.items():
        for (k, l), b in index.items():
            out = {}
            if j == k:
                out[index[(i, l)]] = out.get(index[(i, l)], 0) + 1
            if l == i:
                out[index[(k, j)]] = out.get(index[(k, j)], 0) - 1
            out = {c: v for c, v in out.items() if v}
            brackets.append((a, b, out))
    gram = [[0] * r for _ in range(r)]
    for (i, j), a in index.items():
        for (k, l), b in index.items():
            if j == k and l == i:
                gram[a][b] = sign
    mats = []
    for (i, j) in index:
        m = [[0] * n for _ in range(n)]
        m[i][j] = 1
        mats.append(m)
    return LieAlgebraSpec.from_sparse(name or f"gl{n}", basis, brackets, gram, mats)


def atiyah_cotangent(n):
    """End of the cotangent bundle of an n-dimensional chart with the negative trace form.

    Basis ``E_ij = dx_i (x) d/dx_j`` acts by ``w -> (iota_{d/dx_j} w) dx_i``, i.e. as
    the matrix unit ``e_ij`` on the coframe, so ``<E_ij, E_kl> = -delta_jk delta_il``.
    """
    return gl(n, sign=-1, name="atiyah-cotangent",
              labels=lambda i, j: f"dx{i + 1}@d{j + 1}")


BUILTIN = {"gl1": gl1, "sl2": sl2}


def builtin(name, n=None):
    if name == "atiyah-cotangent":
        if n is None:
            raise LieSpecError("atiyah-cotangent needs the chart dimension")
        return atiyah_cotangent(n)
    if name in BUILTIN:
        return BUILTIN[name]()
    if name.startswith("gl") and name[2:].isdigit():
        return gl(int(name[2:]))
    raise LieSpecError(f"unknown built-in Lie algebra {name!r}")


# -- validation -----------------------------------------------------------------------

def validate_lie(spec):
    """Check antisymmetry, Jacobi, gram symmetry and ad-invariance on basis triples."""
    r = spec.dim
    rep = Report(f"validate_lie({spec.name})")
    c = spec.structure
    g = spec.gram
    failures = {"antisymmetry": None, "jacobi": None, "symmetry": None, "ad-invariance": None}
    for i, j in product(range(r), repeat=2):
        if failures["antisymmetry"] is None and any(c[i][j][k] + c[j][i][k] for k in range(r)):
            failures["antisymmetry"] = (i, j)
        if failures["symmetry"] is None and g[i][j] != g[j][i]:
            failures["symmetry"] = (i, j)

    def br(a, b):
        out = [Fraction(0)] * r
        for p in range(r):
            if a[p]:
                for q in range(r):
                    if b[q]:
                        for k in range(r):
                            out[k] += a[p] * b[q] * c[p][q][k]
        return out

    def unit(i):
        v = [Fraction(0)] * r
        v[i] = Fraction(1)
        return v

    def pair(a, b):
        return sum(a[p] * b[q] * g[p][q] for p in range(r) for q in range(r))

    for i, j, k in product(range(r), repeat=3):
        ei, ej, ek = unit(i), unit(j), unit(k)
        if failures["jacobi"] is None:
            lhs = br(ei, br(ej, ek))
            rhs1 = br(br(ei, ej), ek)
            rhs2 = br(ej, br(ei, ek))
            if any(a - b - e for a, b, e in zip(lhs, rhs1, rhs2)):
                failures["jacobi"] = (i, j, k)
        if failures["ad-invariance"] is None:
            if pair(br(ek, ei), ej) + pair(ei, br(ek, ej)) != 0:
                failures["ad-invariance"] = (k, i, j)
    for name, wit in failures.items():
        witness = "" if wit is None else "(" + ", ".join(spec.basis[t] for t in wit) + ")"
        rep.add(name, wit is None, witness)
        if wit is not None:
            rep.checks[-1].witness = witness
    return rep


# -- g-valued forms ----------------------------------------------------------------------

class GForm:
    """A g-valued form: one DiffForm per basis vector, all of the same degree."""

    __slots__ = ("chart", "lie", "comps", "_degree")

    def __init__(self, chart, lie, comps, degree=None):
        comps = tuple(comps)
        if len(comps) != lie.dim:
            raise LieSpecError(f"expected {lie.dim} components, got {len(comps)}")
        comps = tuple(DiffForm.function(c) if isinstance(c, RatFunc) else c for c in comps)
        degs = {c.degree for c in comps}
        if len(degs) > 1:
            raise ValueError("components of a GForm must share one degree")
        for c in comps:
            if c.chart != chart:
                raise ChartError("GForm component over a different chart")
        if degs:
            degree = degs.pop()
        elif degree is None:
            raise ValueError("the degree of a GForm over a zero algebra must be given")
        self.chart = chart
        self.lie = lie
        self.comps = comps
        self._degree = degree

    @property
    def degree(self):
        return self._degree

    @classmethod
    def zero(cls, chart, lie, degree):
        return cls(chart, lie, [DiffForm.zero(chart, degree)] * lie.dim, degree)

    @classmethod
    def from_terms(cls, chart, lie, degree, terms):
        """``terms`` is an iterable of (form, basis index or name)."""
        comps = [DiffForm.zero(chart, degree) for _ in range(lie.dim)]
        for form, which in terms:
            k = lie.basis.index(which) if isinstance(which, str) else which
            comps[k] = comps[k] + form
        return cls(chart, lie, comps)

    @classmethod
    def from_matrix(cls, chart, lie, degree, mat):
        """Convert a square matrix of forms (via the matrix realization)."""
        zero = DiffForm.zero(chart, degree)
        mat = [[DiffForm.function(x) if isinstance(x, RatFunc) else x for x in row] for row in mat]
        return cls(chart, lie, lie.coords_of_matrix(mat, zero))

    def to_matrix(self):
        return self.lie.matrix_of_coords(self.comps, DiffForm.zero(self.chart, self.degree))

    def functions(self):
        """Components of a 0-form as RatFuncs."""
        if self.degree != 0:
            raise ValueError("not a 0-form")
        return [c.as_function() for c in self.comps]

    def _check(self, other):
        if other.lie != self.lie:
            raise LieSpecError("Lie algebra mismatch")
        if other.chart != self.chart:
            raise ChartError("chart mismatch")

    def __add__(self, other):
        self._check(other)
        return GForm(self.chart, self.lie, [a + b for a, b in zip(self.comps, other.comps)],
                     self.degree)

    def __neg__(self):
        return GForm(self.chart, self.lie, [-a for a in self.comps], self.degree)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        return GForm(self.chart, self.lie, [a.scale(f) for a in self.comps], self.degree)

    __mul__ = scale
    __rmul__ = scale

    def is_zero(self):
        return all(c.is_zero() for c in self.comps)

    def __eq__(self, other):
        if not isinstance(other, GForm):
            return NotImplemented
        return self.lie == other.lie and self.chart == other.chart and self.comps == other.comps

    def __hash__(self):
        return hash((self.lie.name, self.comps))

    def lift(self, chart):
        return GForm(chart, self.lie, [c.lift(chart) for c in self.comps], self.degree)

    def map_forms(self, fn, degree=None):
        """Apply ``fn`` to every component; ``degree`` is the result degree (needed when dim = 0)."""
        return GForm(self.chart, self.lie, [fn(c) for c in self.comps],
                     self.degree if degree is None else degree)

    def d(self):
        return self.map_forms(d, self.degree + 1)

    def at(self, xi):
        """Contraction with a vector field (degree drops by one)."""
        return self.map_forms(lambda c: contract(xi, c), self.degree - 1)

    def pullback(self, s):
        return GForm(s.target, self.lie, [s.pullback(c) for c in self.comps], self.degree)

    def __str__(self):
        parts = []
        for name, c in zip(self.lie.basis, self.comps):
            if not c.is_zero():
                parts.append(f"({c})@{name}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"GForm<{self.degree}>({self})"


def gbracket(A, B):
    """``[A, B]`` with ``[alpha (x) a, beta (x) b] = (alpha ^ beta) (x) [a, b]``."""
    A._check(B)
    lie = A.lie
    r = lie.dim
    out = [DiffForm.zero(A.chart, A.degree + B.degree) for _ in range(r)]
    for i in range(r):
        if A.comps[i].is_zero():
            continue
        for j in range(r):
            if B.comps[j].is_zero():
                continue
            consts = lie.structure[i][j]
            if not any(consts):
                continue
            w = wedge(A.comps[i], B.comps[j])
            if w.is_zero():
                continue
            for k in range(r):
                if consts[k]:
                    out[k] = out[k] + w.scale(consts[k])
    return GForm(A.chart, lie, out, A.degree + B.degree)


def gpair(A, B):
    """``<A ^ B>`` with ``<alpha (x) a ^ beta (x) b> = (alpha ^ beta) <a, b>``."""
    A._check(B)
    lie = A.lie
    out = DiffForm.zero(A.chart, A.degree + B.degree)
    for i in range(lie.dim):
        for j in range(lie.dim):
            g = lie.gram[i][j]
            if g and not A.comps[i].is_zero() and not B.comps[j].is_zero():
                out = out + wedge(A.comps[i], B.comps[j]).scale(g)
    return out


def covariant_d(a, B):
    """``d B + [a, B]`` for the connection ``d + ad(a)``; ``a=None`` means ``d``."""
    out = B.d()
    if a is not None:
        out = out + gbracket(a, B)
    return out


def mc_residual(a, base=None):
    """``d a + [base, a] + 1/2 [a, a]``: flatness of ``d + ad(base) + ad(a)`` given flat base."""
    if a.degree != 1:
        raise ValueError("Maurer-Cartan residual needs a 1-form")
    return covariant_d(base, a) + gbracket(a, a).scale(Fraction(1, 2))


def require_mc(a, base=None, what="gauge"):
    res = mc_residual(a, base)
    if not res.is_zero():
        raise MaurerCartanError(f"{what} violates the Maurer-Cartan equation: {res}", res)


def triple(A):
    """``<A ^ [A, A]>`` for a g-valued 1-form."""
    if A.degree != 1:
        raise ValueError("triple product needs a 1-form")
    return gpair(A, gbracket(A, A))


def pointwise_triple(A):
    """The 3-form ``(xi1, xi2, xi3) -> <A(xi1), [A(xi2), A(xi3)]>``; equals ``triple(A) / 6``."""
    return triple(A).scale(Fraction(1, 6))


# -- matrix helpers for pure gauges ----------------------------------------------------------

def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for k in range(m):
                t = a[i][k] * b[k][j]
                acc = t if acc is None else acc + t
            row.append(acc)
        out.append(row)
    return out


def mat_inverse(m, chart):
    """Inverse of a square matrix of RatFuncs by Gauss-Jordan elimination."""
    n = len(m)
    aug = [list(row) + [chart.one() if i == j else chart.zero() for j in range(n)]
           for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def mat_det(m, chart):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = chart.zero()
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * mat_det(minor, chart)
        total = total + (term if j % 2 == 0 else -term)
    return total


def mat_of_forms_mul(a, b):
    """Product of matrices whose entries are forms or functions (wedge of entries)."""
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for k in range(m):
                t = wedge(a[i][k], b[k][j])
                acc = t if acc is None else acc + t
            row.append(acc)
        out.append(row)
    return out


def maurer_cartan_form(g, lie, chart):
    """The pure gauge ``g^{-1} dg`` as a GForm (g a square matrix of RatFuncs)."""
    ginv = mat_inverse(g, chart)
    dg = [[d(x) for x in row] for row in g]
    a = mat_of_forms_mul([[DiffForm.function(x) for x in row] for row in ginv], dg)
    return GForm.from_matrix(chart, lie, 1, a)


def right_maurer_cartan_form(g, lie, chart):
    """``dg g^{-1}`` as a GForm."""
    ginv = mat_inverse(g, chart)
    dg = [[d(x) for x in row] for row in g]
    a = mat_of_forms_mul(dg, [[DiffForm.function(x) for x in row] for row in ginv])
    return GForm.from_matrix(chart, lie, 1, a)


def adjoint(g, X, chart):
    """``g X g^{-1}`` for a GForm ``X`` and an invertible matrix ``g``."""
    ginv = mat_inverse(g, chart)
    gm = [[DiffForm.function(x) for x in row] for row in g]
    gi = [[DiffForm.function(x) for x in row] for row in ginv]
    m = mat_of_forms_mul(mat_of_forms_mul(gm, X.to_matrix()), gi)
    return GForm.from_matrix(chart, X.lie, X.degree, m)
