"""Combinatorial covers, Čech cochains and the Pontryagin cocycle.

Conventions:

* ``(dc)_{i0..ip+1} = sum_k (-1)^k c_{i0..^ik..ip+1}`` restricted to the overlap chart.
* A total cocycle is ``(H, B)`` with ``H`` a 1-cochain of closed 3-forms and ``B``
  a 2-cochain of 2-forms such that ``dB = 0`` (Čech) and ``dH = dB`` (Čech of H equals
  de Rham of B).  It is a coboundary when ``B = d_cech(beta)`` and
  ``H = d_cech(h) + d(beta)`` with ``h`` a 0-cochain of closed 3-forms.
* Pontryagin cocycle of flat connections ``d + ad(a_i)``, with ``A_ij = a_j - a_i``:
  ``H_ij = <A_ij(.), [A_ij(.), A_ij(.)]>`` as a pointwise 3-form (``triple / 6``) and
  ``B_ijk = -<A_ij ^ A_jk> - <A_jk ^ A_ki> + <A_ki ^ A_ij>``.
* The skew embedding of 2-forms into ``Omega^1 (x) Omega^1`` is
  ``w ^ v -> -1/2 (w (x) v - v (x) w)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import flint

from . import linalg
from .liestruct import (GForm, LieSpecError, MaurerCartanError, adjoint, gpair, mat_inverse,
                        mat_mul, mc_residual, pointwise_triple, right_maurer_cartan_form)
from .report import Report
from .symcalc import Chart, DiffForm, RatFunc, Substitution, d
from .symcalc.generic import monomial
from .symcalc.ratfunc import ChartError


class NerveError(ValueError):
    """Malformed cover data or a failed precondition on it."""


def simplex_key(s):
    """``(0, 1, 2) -> "0-1-2"``, the form used in problem files and reports."""
    return "-".join(map(str, s))


def _faces(sigma):
    return [sigma[:k] + sigma[k + 1:] for k in range(len(sigma))]


# -- covers --------------------------------------------------------------------------------------

class CoverNerve:
    """Vertices with charts, overlap charts per simplex and restriction substitutions.

    ``restrictions`` maps ``(face, simplex)`` for codimension-one faces to a
    Substitution from the face chart to the simplex chart.  Longer composites
    are obtained by chaining through faces; :meth:`check` verifies that every
    square of restrictions commutes.
    """

    def __init__(self, name, charts, simplices, restrictions, check=True):
        self.name = name
        simp = set()
        for s in simplices:
            s = tuple(sorted(s))
            if len(set(s)) != len(s):
                raise NerveError(f"degenerate simplex {s}")
            simp.add(s)
        for s in list(simp):
            for k in range(1, len(s)):
                for t in combinations(s, k):
                    if t not in simp:
                        raise NerveError(f"simplex {s} has a missing face {t}")
        self._simplices = simp
        self._charts = {}
        for s, ch in charts.items():
            s = (s,) if not isinstance(s, tuple) else tuple(sorted(s))
            self._charts[s] = ch
        for s in simp:
            if s not in self._charts:
                raise NerveError(f"no chart for simplex {s}")
        self._restr = {}
        for (t, s), sub in restrictions.items():
            t = (t,) if not isinstance(t, tuple) else tuple(sorted(t))
            self._restr[(t, tuple(sorted(s)))] = sub
        for s in simp:
            if len(s) > 1:
                for t in _faces(s):
                    if (t, s) not in self._restr:
                        raise NerveError(f"no restriction from {t} to {s}")
                    sub = self._restr[(t, s)]
                    if sub.source != self._charts[t] or sub.target != self._charts[s]:
                        raise NerveError(f"restriction {t}->{s} has the wrong charts")
        self._cache = {}
        if check:
            rep = self.check()
            if not rep.passed:
                raise NerveError(f"restrictions do not commute: {rep.failed()}")

    @property
    def vertices(self):
        return sorted(s[0] for s in self._simplices if len(s) == 1)

    def simplices(self, p=None):
        if p is None:
            return sorted(self._simplices, key=lambda s: (len(s), s))
        return sorted(s for s in self._simplices if len(s) == p + 1)

    def dimension(self):
        return max(len(s) for s in self._simplices) - 1

    def has(self, sigma):
        return tuple(sorted(sigma)) in self._simplices

    def chart(self, sigma, params=()):
        ch = self._charts[tuple(sorted(sigma))]
        return ch.with_params(params) if params else ch

    def restriction(self, tau, sigma, params=()):
        """Composite substitution from the chart of ``tau`` to the chart of ``sigma``."""
        tau, sigma = tuple(sorted(tau)), tuple(sorted(sigma))
        key = (tau, sigma, tuple(params))
        if key in self._cache:
            return self._cache[key]
        if not set(tau) <= set(sigma):
            raise NerveError(f"{tau} is not a face of {sigma}")
        if tau == sigma:
            ch = self.chart(sigma, params)
            sub = Substitution.identity(ch)
        else:
            missing = [v for v in sigma if v not in tau]
            step = tuple(sorted(tau + (missing[0],)))
            first = self._restr[(tau, step)]
            if params:
                first = Substitution(self.chart(tau, params), self.chart(step, params),
                                     {v: img.lift(self.chart(step, params))
                                      for v, img in first.assignment.items()})
            sub = first.then(self.restriction(step, sigma, params)) if step != sigma else first
        self._cache[key] = sub
        return sub

    def restrict(self, value, tau, sigma):
        """Pull a value (function, form, g-form or tensor) from ``tau`` to ``sigma``."""
        tau, sigma = tuple(sorted(tau)), tuple(sorted(sigma))
        if tau == sigma:
            return value
        probe = value
        while isinstance(probe, list):
            probe = probe[0]
        sub = self.restriction(tau, sigma, probe.chart.params)
        return _pull(sub, value)

    def check(self):
        """Every pair of two-step restriction paths agrees."""
        rep = Report(f"nerve {self.name}")
        bad = None
        for s in self.simplices():
            if len(s) < 3:
                continue
            for t in combinations(s, len(s) - 2):
                mids = [m for m in _faces(s) if set(t) <= set(m)]
                paths = [self._restr[(t, m)].then(self._restr[(m, s)]) for m in mids]
                if any(p != paths[0] for p in paths[1:]):
                    bad = f"{t} -> {s}"
                    break
            if bad:
                break
        rep.add("restrictions-commute", bad is None, witness=bad or "")
        return rep


def _pull(sub, value):
    if isinstance(value, RatFunc):
        return sub.apply(value)
    if isinstance(value, (DiffForm, GForm)):
        return sub.pullback(value) if isinstance(value, DiffForm) else value.pullback(sub)
    if isinstance(value, Tensor2):
        return value.pullback(sub)
    if isinstance(value, list):
        return [[_pull(sub, x) for x in row] for row in value]
    raise TypeError(f"cannot restrict {type(value).__name__}")


def constant_nerve(chart, simplices, name="nerve"):
    """All simplices share one chart and restrictions are identities."""
    simp = {tuple(sorted(s)) for s in simplices}
    charts = {s: chart for s in simp}
    ident = Substitution.identity(chart)
    restr = {(t, s): ident for s in simp if len(s) > 1 for t in _faces(s)}
    return CoverNerve(name, charts, simp, restr)


def tetrahedron_nerve(chart, boundary=False):
    """Four vertices; the full 3-simplex, or only its boundary (a 2-sphere)."""
    top = 2 if boundary else 3
    simp = [s for k in range(1, top + 2) for s in combinations(range(4), k)]
    return constant_nerve(chart, simp, "boundary-tetrahedron" if boundary else "tetrahedron")


def segment_nerve(chart0, chart1, overlap, to_overlap0, to_overlap1, name="segment"):
    """Two charts and one overlap (no 2-simplices)."""
    charts = {0: chart0, 1: chart1, (0, 1): overlap}
    restr = {((0,), (0, 1)): to_overlap0, ((1,), (0, 1)): to_overlap1}
    return CoverNerve(name, charts, [(0,), (1,), (0, 1)], restr)


P1XP1_VERTICES = {0: (0, 0), 1: (1, 0), 2: (0, 1), 3: (1, 1)}
"""Vertex bits: 0 means the affine coordinate (x or y), 1 the inverted one (u = 1/x, v = 1/y)."""


def _p1_names(bits):
    return ("u" if bits[0] else "x", "v" if bits[1] else "y")


def p1xp1_atlas():
    """The standard 4-chart atlas of P1 x P1 with all intersections nonempty.

    The chart of a simplex is the chart of its smallest vertex, with the
    coordinates that some other vertex inverts declared units.
    """
    simp = [s for k in range(1, 5) for s in combinations(range(4), k)]
    charts = {}
    for s in simp:
        m = P1XP1_VERTICES[s[0]]
        names = _p1_names(m)
        units = tuple(names[a] for a in range(2)
                      if any(P1XP1_VERTICES[v][a] != m[a] for v in s))
        label = "U" + "".join(map(str, s))
        charts[s] = Chart(label, names, (), units)
    restr = {}
    for s in simp:
        if len(s) < 2:
            continue
        tgt = charts[s]
        m = P1XP1_VERTICES[s[0]]
        for t in _faces(s):
            src = charts[t]
            bits = P1XP1_VERTICES[t[0]]
            assign = {}
            for a, name in enumerate(src.vars):
                own = tgt.var(a)
                assign[name] = own if bits[a] == m[a] else own.inverse()
            restr[(t, s)] = Substitution(src, tgt, assign)
    return CoverNerve("P1xP1", charts, simp, restr)


def p1xp1_line_bundle(nerve, p, q):
    """Transition functions of O(p, q): ``g_ij = (w_j / w_i)`` with ``w = X^p Y^q`` per chart.

    ``w`` is 1 on a chart using the affine coordinate and ``X`` (resp. ``Y``)
    on a chart using the inverted one, written on the overlap chart.
    """
    out = {}
    for s in nerve.simplices(1):
        ch = nerve.chart(s)
        m = P1XP1_VERTICES[s[0]]
        glob = [ch.var(a) if m[a] == 0 else ch.var(a).inverse() for a in range(2)]

        def w(v):
            bits = P1XP1_VERTICES[v]
            val = ch.one()
            for a, e in enumerate((p, q)):
                if bits[a]:
                    val = val * glob[a] ** e
            return val
        out[s] = [[w(s[1]) / w(s[0])]]
    return out


# -- value types -------------------------------------------------------------------------------

class Tensor2:
    """A section of ``Omega^1 (x) Omega^1``: ``sum T[a][b] dx_a (x) dx_b``."""

    __slots__ = ("chart", "rows")

    def __init__(self, chart, rows):
        self.chart = chart
        self.rows = tuple(tuple(x for x in row) for row in rows)

    @classmethod
    def zero(cls, chart):
        return cls(chart, [[chart.zero()] * chart.n for _ in range(chart.n)])

    @classmethod
    def tensor(cls, w, v):
        n = w.chart.n
        return cls(w.chart, [[w.coeff((a,)) * v.coeff((b,)) for b in range(n)] for a in range(n)])

    @classmethod
    def skew(cls, form):
        """``w ^ v -> -1/2 (w (x) v - v (x) w)``."""
        chart = form.chart
        n = chart.n
        rows = [[chart.zero()] * n for _ in range(n)]
        for (a, b), c in form.items():
            rows[a][b] = rows[a][b] - c * Fraction(1, 2)
            rows[b][a] = rows[b][a] + c * Fraction(1, 2)
        return cls(chart, rows)

    def __add__(self, other):
        return Tensor2(self.chart, [[x + y for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return Tensor2(self.chart, [[-x for x in r] for r in self.rows])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        return Tensor2(self.chart, [[x * f for x in r] for r in self.rows])

    def is_zero(self):
        return all(x.is_zero() for r in self.rows for x in r)

    def lift(self, chart):
        return Tensor2(chart, [[x.lift(chart) for x in r] for r in self.rows])

    def items(self):
        n = self.chart.n
        return [((a, b), self.rows[a][b]) for a in range(n) for b in range(n)
                if not self.rows[a][b].is_zero()]

    def pullback(self, sub):
        J = sub.jacobian()
        n, m = sub.source.n, sub.target.n
        img = [[sub.apply(x) for x in r] for r in self.rows]
        out = [[sub.target.zero()] * m for _ in range(m)]
        for a in range(n):
            for b in range(n):
                if img[a][b].is_zero():
                    continue
                for c in range(m):
                    if J[a][c].is_zero():
                        continue
                    t = img[a][b] * J[a][c]
                    for e in range(m):
                        if not J[b][e].is_zero():
                            out[c][e] = out[c][e] + t * J[b][e]
        return Tensor2(sub.target, out)

    def __eq__(self, other):
        return isinstance(other, Tensor2) and self.chart == other.chart and self.rows == other.rows

    def __hash__(self):
        return hash((self.chart, self.rows))

    def __str__(self):
        parts = [f"({c})*dx{a + 1}(x)dx{b + 1}" for (a, b), c in self.items()]
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def tensor_gpair(A, B):
    """``<A (x) B>`` for g-valued 1-forms, valued in ``Omega^1 (x) Omega^1``."""
    A._check(B)
    lie = A.lie
    out = Tensor2.zero(A.chart)
    for i in range(lie.dim):
        for j in range(lie.dim):
            g = lie.gram[i][j]
            if g and not A.comps[i].is_zero() and not B.comps[j].is_zero():
                out = out + Tensor2.tensor(A.comps[i], B.comps[j]).scale(g)
    return out


# -- cochains ------------------------------------------------------------------------------------

@dataclass
class Cochain:
    """Values on the ordered simplices of one degree, extended by alternation.

    ``kind`` is ``("form", q)``, ``("gform", q)`` or ``("tensor",)``; missing
    simplices carry the zero value.  ``params`` are the symbolic parameters
    shared by all values.
    """

    nerve: CoverNerve
    degree: int
    kind: tuple
    values: dict = field(default_factory=dict)
    params: tuple = ()
    lie: object = None

    def __post_init__(self):
        vals = {}
        for s, v in self.values.items():
            s = tuple(s)
            key = tuple(sorted(s))
            if len(key) != self.degree + 1 or not self.nerve.has(key):
                raise NerveError(f"{s} is not a {self.degree}-simplex of the nerve")
            if _perm_sign(s) < 0:
                v = -v
            ch = self.nerve.chart(key, self.params)
            if v.chart != ch:
                try:
                    v = v.lift(ch)
                except ChartError as exc:
                    raise NerveError(f"value on {key} lives on the wrong chart: {exc}") from None
            vals[key] = v
        self.values = vals

    def zero_value(self, sigma):
        ch = self.nerve.chart(sigma, self.params)
        if self.kind[0] == "form":
            return DiffForm.zero(ch, self.kind[1])
        if self.kind[0] == "gform":
            return GForm.zero(ch, self.lie, self.kind[1])
        return Tensor2.zero(ch)

    def __getitem__(self, s):
        key = tuple(sorted(s))
        v = self.values.get(key)
        if v is None:
            v = self.zero_value(key)
        return -v if _perm_sign(tuple(s)) < 0 else v

    def like(self, degree, values):
        return Cochain(self.nerve, degree, self.kind, values, self.params, self.lie)

    def map(self, fn, kind=None):
        return Cochain(self.nerve, self.degree, kind or self.kind,
                       {s: fn(v) for s, v in self.values.items()}, self.params, self.lie)

    def __add__(self, other):
        keys = set(self.values) | set(other.values)
        return self.like(self.degree, {s: self[s] + other[s] for s in keys})

    def __neg__(self):
        return self.map(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self.map(lambda v: v.scale(c))

    def is_zero(self):
        return all(v.is_zero() for v in self.values.values())

    def with_params(self, params):
        extra = tuple(p for p in params if p not in self.params)
        allp = self.params + extra
        return Cochain(self.nerve, self.degree, self.kind,
                       {s: v.lift(self.nerve.chart(s, allp)) for s, v in self.values.items()},
                       allp, self.lie)

    def nonzero(self):
        return {s: v for s, v in self.values.items() if not v.is_zero()}

    def __str__(self):
        items = sorted(self.nonzero().items())
        if not items:
            return "0"
        return "; ".join(f"{simplex_key(s)}: {v}" for s, v in items)


def _perm_sign(s):
    sign = 1
    s = list(s)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def cech_d(c):
    """Čech differential with the alternating-face convention."""
    out = {}
    for s in c.nerve.simplices(c.degree + 1):
        total = None
        for k, t in enumerate(_faces(s)):
            term = c.nerve.restrict(c[t], t, s)
            if k % 2:
                term = -term
            total = term if total is None else total + term
        out[s] = total
    return c.like(c.degree + 1, out)


def de_rham(c):
    if c.kind[0] != "form":
        raise NerveError("de Rham differential needs a form-valued cochain")
    return Cochain(c.nerve, c.degree, ("form", c.kind[1] + 1),
                   {s: d(v) for s, v in c.values.items()}, c.params)


# -- total cocycles ------------------------------------------------------------------------------

@dataclass
class TotalCocycle:
    """``H`` (1-cochain of closed 3-forms) and ``B`` (2-cochain of 2-forms)."""

    H: Cochain
    B: Cochain
    data: dict = field(default_factory=dict)

    @property
    def nerve(self):
        return self.H.nerve

    def __sub__(self, other):
        return TotalCocycle(self.H - other.H, self.B - other.B)

    def scale(self, c):
        return TotalCocycle(self.H.scale(c), self.B.scale(c))

    def to_dict(self):
        def enc(c):
            return {simplex_key(s): str(v) for s, v in sorted(c.nonzero().items())}
        return {"H": enc(self.H), "B": enc(self.B)}


def zero_total(nerve, params=()):
    return TotalCocycle(Cochain(nerve, 1, ("form", 3), {}, params),
                        Cochain(nerve, 2, ("form", 2), {}, params))


def _first_nonzero(c):
    for s, v in sorted(c.values.items()):
        if not v.is_zero():
            return s, v
    return None, None


def total_cocycle_check(t):
    """Residuals of ``dH``, ``d_cech B`` and ``d_cech H - dB``, localized to a simplex."""
    rep = Report("total cocycle")
    for name, c in (("dH", de_rham(t.H)), ("cech-B", cech_d(t.B)),
                    ("cech-H-minus-dB", cech_d(t.H) - de_rham(t.B))):
        s, v = _first_nonzero(c)
        rep.add(name, v if v is not None else True,
                witness="" if s is None else "simplex " + simplex_key(s))
    return rep


def _edge_forms(nerve, gauges):
    """``A_ij = a_j - a_i`` on each edge, with the common parameters."""
    params = []
    for a in gauges.values():
        for p in a.chart.params:
            if p not in params:
                params.append(p)
    params = tuple(params)
    lifted = {v: a.lift(nerve.chart((v,), params)) for v, a in gauges.items()}
    A = {}
    for s in nerve.simplices(1):
        i, j = s
        A[s] = nerve.restrict(lifted[j], (j,), s) - nerve.restrict(lifted[i], (i,), s)
    return A, params


def _assemble(nerve, lie, A, params, frame=None):
    """Pontryagin ``(H, B)`` from edge forms ``A_ij`` (in the frame of ``i``).

    ``frame(i, j, k, X)`` re-expresses ``X`` (given in the frame of ``j`` on the
    2-simplex) in the frame of ``i``; the default is the identity.
    """
    Hv = {s: pointwise_triple(a) for s, a in A.items()}
    Bv = {}
    for s in nerve.simplices(2):
        i, j, k = s
        Aij = nerve.restrict(A[(i, j)], (i, j), s)
        Ajk = nerve.restrict(A[(j, k)], (j, k), s)
        if frame is not None:
            Ajk = frame(i, j, k, Ajk)
        Aki = -nerve.restrict(A[(i, k)], (i, k), s)
        Bv[s] = -gpair(Aij, Ajk) - gpair(Ajk, Aki) + gpair(Aki, Aij)
    H = Cochain(nerve, 1, ("form", 3), Hv, params)
    B = Cochain(nerve, 2, ("form", 2), Bv, params)
    conn = Cochain(nerve, 1, ("gform", 1), A, params, lie)
    return TotalCocycle(H, B, {"A": conn})


def pontryagin_cocycle(nerve, gauges):
    """``(H, B)`` for flat connections ``d + ad(a_i)`` on a common trivialization."""
    vs = nerve.vertices
    if sorted(gauges) != vs:
        raise NerveError(f"need one gauge per vertex {vs}")
    lies = {a.lie.name for a in gauges.values()}
    if len(lies) != 1:
        raise LieSpecError("gauges valued in different Lie algebras")
    lie = next(iter(gauges.values())).lie
    for v, a in gauges.items():
        res = mc_residual(a)
        if not res.is_zero():
            raise MaurerCartanError(f"gauge at vertex {v} violates Maurer-Cartan: {res}", res)
    A, params = _edge_forms(nerve, gauges)
    return _assemble(nerve, lie, A, params)


def transition_check(nerve, transitions):
    """``g_ik = g_ij g_jk`` on every 2-simplex and invertibility on every edge."""
    rep = Report("transition cocycle")
    bad = None
    for s in nerve.simplices(1):
        det_ok = True
        try:
            mat_inverse(transitions[s], nerve.chart(s))
        except (ZeroDivisionError, ValueError):
            det_ok = False
        if not det_ok:
            bad = simplex_key(s)
            break
    rep.add("invertible", bad is None, witness=bad or "")
    res = None
    where = ""
    for s in nerve.simplices(2):
        i, j, k = s
        gij = nerve.restrict(transitions[(i, j)], (i, j), s)
        gjk = nerve.restrict(transitions[(j, k)], (j, k), s)
        gik = nerve.restrict(transitions[(i, k)], (i, k), s)
        prod = mat_mul(gij, gjk)
        diff = [x - y for r1, r2 in zip(prod, gik) for x, y in zip(r1, r2)]
        if any(not x.is_zero() for x in diff):
            res, where = diff, "simplex " + simplex_key(s)
            break
    rep.add("cocycle", res if res is not None else True, witness=where)
    return rep


def pontryagin_from_transitions(nerve, transitions, lie):
    """Pontryagin cocycle of the flat chart connections of a bundle with transitions ``g_ij``.

    ``A_ij = -dg_ij g_ij^-1`` is the difference of the flat connections in
    the frame of ``i``; on 2-simplices ``A_jk`` is moved to that frame by
    ``Ad(g_ij)``.  ``lie`` must carry a matrix realization (gl_n).
    """
    if not lie.matrices:
        raise LieSpecError("the Lie algebra needs a matrix realization")
    rep = transition_check(nerve, transitions)
    if not rep.passed:
        raise NerveError(f"transition data rejected: {rep.failed()}")
    A = {}
    for s in nerve.simplices(1):
        ch = nerve.chart(s)
        A[s] = -right_maurer_cartan_form(transitions[s], lie, ch)

    def frame(i, j, k, X):
        s = (i, j, k)
        g = nerve.restrict(transitions[(i, j)], (i, j), s)
        return adjoint(g, X, nerve.chart(s))

    t = _assemble(nerve, lie, A, (), frame)
    t.data["transitions"] = transitions
    t.data["frame"] = frame
    return t


def torsor_class(nerve, twists, sections):
    """Total cocycle of an exact-Courant torsor glued from local data.

    ``twists[ij]`` are closed 3-forms (the local differences, normal forms
    ``Q_{H_ij}``) satisfying the gluing condition ``d_cech twists = 0``;
    ``sections[ij]`` are 2-forms giving connections on them.  Returns
    ``(curvatures, d_cech sections)``.
    """
    from .courant import ConnectionQ, CourantStruct, curvature
    Tw = Cochain(nerve, 1, ("form", 3), twists)
    glue = cech_d(Tw)
    s, v = _first_nonzero(glue)
    if s is not None:
        raise NerveError(f"twists do not glue on {s}: {v}")
    Hv = {}
    for e, H in Tw.values.items():
        alpha = sections.get(e)
        ch = nerve.chart(e)
        nabla = ConnectionQ.zero(ch) if alpha is None else ConnectionQ.from_form(alpha.lift(ch))
        Hv[e] = curvature(CourantStruct(ch, H), nabla)
    S = Cochain(nerve, 1, ("form", 2), sections)
    return TotalCocycle(Cochain(nerve, 1, ("form", 3), Hv), cech_d(S))


# -- coboundary search -----------------------------------------------------------------------------

def laurent_exponents(chart, degree):
    """Exponent vectors with ``sum |e| <= degree``; negative entries only for unit coordinates."""
    ranges = [range(-degree, degree + 1) if v in chart.units else range(0, degree + 1)
              for v in chart.vars]
    out = [e for e in product(*ranges) if sum(abs(x) for x in e) <= degree]
    out.sort(key=lambda e: (sum(abs(x) for x in e), tuple(-x for x in e)))
    return out


def frame_forms(chart, degree):
    """Wedges of ``dx_i / x_i`` (units) or ``dx_i`` (other coordinates), one per index tuple."""
    theta = [DiffForm.dx(chart, i).scale(chart.var(i).inverse()) if v in chart.units
             else DiffForm.dx(chart, i) for i, v in enumerate(chart.vars)]
    out = []
    for idx in combinations(range(chart.n), degree):
        w = DiffForm.function(chart.one())
        for i in idx:
            w = w * theta[i]
        out.append((idx, w))
    return out


def ansatz_basis(chart, form_degree, degree):
    """``(label, form)`` pairs spanning the Laurent search space on a chart."""
    out = []
    for e in laurent_exponents(chart, degree):
        m = monomial(chart, e)
        for idx, w in frame_forms(chart, form_degree):
            out.append(((e, idx), w.scale(m)))
    return out


def tensor_basis(chart, degree):
    n = chart.n
    theta = [DiffForm.dx(chart, i).scale(chart.var(i).inverse()) if v in chart.units
             else DiffForm.dx(chart, i) for i, v in enumerate(chart.vars)]
    out = []
    for e in laurent_exponents(chart, degree):
        m = monomial(chart, e)
        for a in range(n):
            for b in range(n):
                out.append(((e, (a, b)), Tensor2.tensor(theta[a], theta[b]).scale(m)))
    return out


def _entries(value):
    """Component coefficients of a value as ``{component: RatFunc}``."""
    if isinstance(value, Tensor2):
        return dict(value.items())
    return dict(value.items())


class _System:
    """Column-wise assembly of a sparse system over equation locations.

    Each location (simplex label, equation name, component) collects RatFunc
    entries from columns and a right-hand side.  Entries are brought to a
    common denominator per location and split by coordinate monomial.
    """

    def __init__(self):
        self.cols = []          # list of {loc: RatFunc}
        self.rhs = {}           # loc -> RatFunc (may carry parameters)
        self.labels = []

    def add_column(self, label, entries):
        self.labels.append(label)
        self.cols.append(entries)

    def set_rhs(self, loc, value):
        self.rhs[loc] = value

    def build(self):
        locs = {}
        for k, col in enumerate(self.cols):
            for loc, v in col.items():
                if not v.is_zero():
                    locs.setdefault(loc, []).append((k, v))
        for loc, r in self.rhs.items():
            if not r.is_zero():
                locs.setdefault(loc, [])
        params = []
        for v in self.rhs.values():
            for p in v.chart.params:
                if p not in params:
                    params.append(p)
        pctx = flint.fmpq_mpoly_ctx.get(tuple(params), "deglex") if params else None
        zero = Fraction(0) if pctx is None else pctx.constant(0)
        rows, rhs, keys = [], [], []
        for loc in sorted(locs, key=repr):
            entries = locs[loc]
            r = self.rhs.get(loc)
            if r is not None and r.is_zero():
                r = None
            base = entries[0][1].chart if entries else r.chart.base()
            L = base.ctx.constant(1)
            for _, v in entries:
                L = _lcm(L, v.den)
            if r is not None:
                if any(r.den.degrees()[base.n:]):
                    raise linalg.LinearizationError("right-hand side denominator involves parameters")
                L = _lcm(L, r.den.project_to_context(base.ctx))
            by_mono = {}
            for k, v in entries:
                for exps, c in (v.num * (L / v.den)).terms():
                    by_mono.setdefault(exps, [{}, zero])[0][k] = Fraction(int(c.p), int(c.q))
            if r is not None:
                names = r.chart.names
                n = base.n
                slots = [params.index(names[i]) for i in range(n, len(names))]
                acc = {}
                for exps, c in (r.num * (L.project_to_context(r.chart.ctx) / r.den)).terms():
                    pk = [0] * len(params)
                    for i, s in zip(range(n, len(names)), slots):
                        pk[s] = exps[i]
                    bucket = acc.setdefault(exps[:n], {})
                    bucket[tuple(pk)] = bucket.get(tuple(pk), 0) + c
                for mono, terms in acc.items():
                    entry = by_mono.setdefault(mono, [{}, zero])
                    if pctx is None:
                        entry[1] = sum((Fraction(int(c.p), int(c.q)) for c in terms.values()),
                                       Fraction(0))
                    else:
                        entry[1] = pctx.from_dict({k: v for k, v in terms.items() if v != 0})
            for mono in sorted(by_mono):
                row, b = by_mono[mono]
                row = {k: v for k, v in row.items() if v != 0}
                if not row and linalg._is_zero(b):
                    continue
                rows.append(row)
                rhs.append(b)
                keys.append((loc, mono))
        return rows, rhs, keys, zero


def _lcm(a, b):
    if b.is_one():
        return a
    if a.is_one():
        return b
    g = a.gcd(b)
    return (a * b) / g


@dataclass
class CoboundaryResult:
    found: bool
    certificate: linalg.Certificate
    beta: Cochain | None = None
    h: Cochain | None = None
    verification: Report | None = None
    degree: int = 0

    def to_dict(self):
        out = {"found": self.found, "degree_bound": self.degree,
               "certificate": self.certificate.to_dict()}
        if self.found:
            out["beta"] = {simplex_key(s): str(v) for s, v in sorted(self.beta.nonzero().items())}
            out["h"] = {simplex_key(s): str(v) for s, v in sorted(self.h.nonzero().items())}
        return out


def _locs(prefix, s, value):
    return {(prefix, s, comp): c for comp, c in _entries(value).items()}


def coboundary_solve(t, degree=2):
    """Search ``beta`` (1-cochain of 2-forms) and ``h`` (0-cochain of closed 3-forms).

    Solves ``B = d_cech beta`` and ``H = d_cech h + d beta`` (with ``dh = 0``)
    over the Laurent search space of the given degree on every chart.
    Returns a :class:`CoboundaryResult` whose certificate records the rank of
    the system; when no solution exists it holds a left-kernel witness.
    """
    nerve = t.nerve
    sysm = _System()
    beta_cols, h_cols = [], []
    for e in nerve.simplices(1):
        ch = nerve.chart(e)
        for label, phi in ansatz_basis(ch, 2, degree):
            entries = {}
            for s in nerve.simplices(2):
                if set(e) <= set(s):
                    k = [x for x in s if x not in e][0]
                    sign = -1 if s.index(k) % 2 else 1
                    img = nerve.restrict(phi, e, s)
                    entries.update(_locs("B", s, img.scale(sign)))
            entries.update(_locs("H", e, d(phi)))
            sysm.add_column(("beta", e, label), entries)
            beta_cols.append((e, phi))
    for v in nerve.vertices:
        ch = nerve.chart((v,))
        if ch.n < 3:
            continue
        for label, psi in ansatz_basis(ch, 3, degree):
            entries = {}
            for e in nerve.simplices(1):
                if v in e:
                    sign = 1 if e.index(v) == 1 else -1
                    img = nerve.restrict(psi, (v,), e)
                    entries.update(_locs("H", e, img.scale(sign)))
            entries.update(_locs("dh", (v,), d(psi)))
            sysm.add_column(("h", (v,), label), entries)
            h_cols.append(((v,), psi))
    for s, val in t.B.values.items():
        for comp, c in _entries(val).items():
            sysm.set_rhs(("B", s, comp), c)
    for s, val in t.H.values.items():
        for comp, c in _entries(val).items():
            sysm.set_rhs(("H", s, comp), c)
    rows, rhs, keys, zero = sysm.build()
    ncols = len(sysm.cols)
    sol = linalg.solve(rows, rhs, ncols, zero)
    cert = sol.certificate
    if not sol.found:
        if cert.left_kernel and not linalg.check_left_kernel(rows, rhs, cert.left_kernel):
            raise AssertionError("inconsistency witness failed to verify")
        return CoboundaryResult(False, cert, degree=degree)
    params = t.B.params or t.H.params
    bvals, hvals = {}, {}
    nb = len(beta_cols)
    for k, val in sol.values.items():
        if k < nb:
            e, phi = beta_cols[k]
            ch = nerve.chart(e, params)
            term = phi.lift(ch).scale(linalg.value_on_chart(val, ch))
            bvals[e] = bvals[e] + term if e in bvals else term
        else:
            v, psi = h_cols[k - nb]
            ch = nerve.chart(v, params)
            term = psi.lift(ch).scale(linalg.value_on_chart(val, ch))
            hvals[v] = hvals[v] + term if v in hvals else term
    beta = Cochain(nerve, 1, ("form", 2), bvals, params)
    h = Cochain(nerve, 0, ("form", 3), hvals, params)
    ver = Report("coboundary verification")
    ver.add("B", cech_d(beta) - t.B.with_params(params))
    ver.add("H", cech_d(h) + de_rham(beta) - t.H.with_params(params))
    ver.add("dh", de_rham(h))
    if not ver.passed:
        raise AssertionError(f"coboundary solution failed verification: {ver.failed()}")
    return CoboundaryResult(True, cert, beta, h, ver, degree)


def cochain_coboundary_solve(c, degree=2):
    """Solve ``c = d_cech gamma`` for a tensor-valued 2-cochain over the Laurent search space."""
    nerve = c.nerve
    sysm = _System()
    cols = []
    for e in nerve.simplices(1):
        ch = nerve.chart(e)
        for label, phi in tensor_basis(ch, degree):
            entries = {}
            for s in nerve.simplices(2):
                if set(e) <= set(s):
                    k = [x for x in s if x not in e][0]
                    sign = -1 if s.index(k) % 2 else 1
                    img = nerve.restrict(phi, e, s)
                    entries.update(_locs("C", s, img.scale(sign)))
            sysm.add_column(("gamma", e, label), entries)
            cols.append((e, phi))
    for s, val in c.values.items():
        for comp, x in _entries(val).items():
            sysm.set_rhs(("C", s, comp), x)
    rows, rhs, keys, zero = sysm.build()
    sol = linalg.solve(rows, rhs, len(cols), zero)
    cert = sol.certificate
    if not sol.found:
        if cert.left_kernel and not linalg.check_left_kernel(rows, rhs, cert.left_kernel):
            raise AssertionError("inconsistency witness failed to verify")
        return None, cert
    vals = {}
    for k, val in sol.values.items():
        e, phi = cols[k]
        ch = nerve.chart(e, c.params)
        term = phi.lift(ch).scale(linalg.value_on_chart(val, ch))
        vals[e] = vals[e] + term if e in vals else term
    gamma = Cochain(nerve, 1, ("tensor",), vals, c.params)
    if not (cech_d(gamma) - c).is_zero():
        raise AssertionError("tensor coboundary failed verification")
    return gamma, cert


# -- cup products ----------------------------------------------------------------------------------

def cup_pair(A, frame=None):
    """``(A cup A)_ijk = <A_ij (x) A_jk>`` as an ``Omega^1 (x) Omega^1``-valued 2-cochain.

    Requires ``A_ij + A_jk + A_ki = 0`` on every 2-simplex (after moving
    ``A_jk`` to the frame of ``i`` with ``frame``, if given).
    """
    nerve = A.nerve
    vals = {}
    for s in nerve.simplices(2):
        i, j, k = s
        Aij = nerve.restrict(A[(i, j)], (i, j), s)
        Ajk = nerve.restrict(A[(j, k)], (j, k), s)
        if frame is not None:
            Ajk = frame(i, j, k, Ajk)
        Aik = nerve.restrict(A[(i, k)], (i, k), s)
        res = Aij + Ajk - Aik
        if not res.is_zero():
            raise NerveError(f"A is not a Čech cocycle on {s}: {res}")
        vals[s] = tensor_gpair(Aij, Ajk)
    return Cochain(nerve, 2, ("tensor",), vals, A.params)


def skew_image(B):
    return B.map(Tensor2.skew, kind=("tensor",))


def cup_compare(t, degree=4, gram_scale=1):
    """Is ``cup_pair(A)`` (gram scaled by ``gram_scale``) cohomologous to the image of ``B``?"""
    A = t.data["A"]
    frame = t.data.get("frame")
    if gram_scale != 1:
        lie = A.lie.scaled(gram_scale)
        A = A.map(lambda a: GForm(a.chart, lie, a.comps, a.degree))
        A.lie = lie
    cup = cup_pair(A, frame)
    diff = cup - skew_image(t.B)
    gamma, cert = cochain_coboundary_solve(diff, degree)
    rep = Report(f"cup comparison (D={degree}, gram x{gram_scale})")
    rep.add("cohomologous", gamma is not None)
    rep.data["certificate"] = cert.to_dict()
    if gamma is not None:
        rep.data["gamma"] = str(gamma)
    return rep, gamma, cert


def cocycle_difference(t2, t1):
    """``t2 - t1`` over the union of their parameters."""
    if t1.nerve is not t2.nerve:
        raise NerveError("cocycles live on different nerves")
    params = tuple(dict.fromkeys(t2.H.params + t1.H.params))
    return TotalCocycle(t2.H.with_params(params) - t1.H.with_params(params),
                        t2.B.with_params(params) - t1.B.with_params(params))


def gauge_change_check(nerve, gauges, new_gauges, degree):
    """Two choices of flat connections give cohomologous Pontryagin cocycles."""
    diff = cocycle_difference(pontryagin_cocycle(nerve, new_gauges), pontryagin_cocycle(nerve, gauges))
    return coboundary_solve(diff, degree)


__all__ = [
    "Cochain", "CoboundaryResult", "CoverNerve", "NerveError", "P1XP1_VERTICES", "Tensor2",
    "TotalCocycle", "ansatz_basis", "cech_d", "cocycle_difference", "coboundary_solve", "cochain_coboundary_solve",
    "constant_nerve", "cup_compare", "cup_pair", "de_rham", "gauge_change_check",
    "laurent_exponents", "p1xp1_atlas", "p1xp1_line_bundle", "pontryagin_cocycle",
    "pontryagin_from_transitions", "segment_nerve", "skew_image", "tensor_gpair",
    "tetrahedron_nerve", "torsor_class", "total_cocycle_check", "transition_check", "zero_total",
]
