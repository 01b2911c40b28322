"""Chart models of exact vertex algebroids and vertex extensions.

An element is kept in the canonical form ``alpha + b + sum_i f_i * e_i``:
``alpha`` a 1-form, ``b`` a g-valued function (absent for exact structures)
and ``e_i`` the flat frame lifting ``d/dx_i``.  The frame is normalized by
``[e_i, e_j] = H(d_i, d_j, .)`` and ``<e_i, e_j> = 0``; with this choice the
nine axioms force the operation table below, which the axiom suite re-checks.

* ``f * (g * e_i) = (fg) * e_i + d_i(f) dg + d_i(g) df``
* ``<f * e_i, g * e_j> = -f d_i d_j g - d_i g d_j f - g d_i d_j f``
* ``[f * e_i, g * e_j] = (f d_i g) * e_j - (g d_j f) * e_i - d_i g d(d_j f)
  - d_i d_j f dg - g d(d_i d_j f) + fg H(d_i, d_j, .)``
* ``[v, alpha] = L_{pi v} alpha``, ``[alpha, v] = -i_{pi v} d alpha``
* ``[f * e_i, b] = f nabla_i b``, ``[b, g * e_j] = -g nabla_j b`` and ``[b, c]`` as in
  the Courant extension, with ``nabla = d + ad(a)``.
"""

from __future__ import annotations

from .courant import CourantExt, CourantStruct, ExtElem, frame_curvature
from .liestruct import LieSpecError, validate_lie, zero_lie
from .report import Report
from .symcalc import DiffForm, VectorField, contract, d, forms_from, lie_bracket, lie_derivative
from .symcalc.generic import GenericSpace
from .symcalc.ratfunc import ChartError


class VertexError(ValueError):
    """Shape or precondition failure for a vertex construction."""


class VertexElem:
    """Canonical form ``omega + b + sum_i coeffs[i] * e_i``."""

    __slots__ = ("omega", "b", "coeffs")

    def __init__(self, omega, b, coeffs):
        self.omega = omega
        self.b = tuple(b)
        self.coeffs = tuple(coeffs)

    @property
    def chart(self):
        return self.omega.chart

    @classmethod
    def zero(cls, chart, r=0):
        return cls(DiffForm.zero(chart, 1), [chart.zero()] * r, [chart.zero()] * chart.n)

    @classmethod
    def of_form(cls, omega, r=0):
        chart = omega.chart
        return cls(omega, [chart.zero()] * r, [chart.zero()] * chart.n)

    @classmethod
    def frame(cls, chart, i, coeff=None, r=0):
        """``coeff * e_i``."""
        cs = [chart.zero()] * chart.n
        cs[i] = chart.one() if coeff is None else coeff
        return cls(DiffForm.zero(chart, 1), [chart.zero()] * r, cs)

    def anchor(self):
        return VectorField(self.chart, self.coeffs)

    def __add__(self, other):
        return VertexElem(self.omega + other.omega, [a + b for a, b in zip(self.b, other.b)],
                          [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return VertexElem(-self.omega, [-a for a in self.b], [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self):
        return (self.omega.is_zero() and all(a.is_zero() for a in self.b)
                and all(a.is_zero() for a in self.coeffs))

    def lift(self, chart):
        return VertexElem(self.omega.lift(chart), [a.lift(chart) for a in self.b],
                          [a.lift(chart) for a in self.coeffs])

    def __eq__(self, other):
        return (isinstance(other, VertexElem) and self.omega == other.omega and self.b == other.b
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.omega, self.b, self.coeffs))

    def __str__(self):
        parts = []
        if not self.omega.is_zero():
            parts.append(str(self.omega))
        for k, c in enumerate(self.b):
            if not c.is_zero():
                parts.append(f"({c})@b{k}")
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                parts.append(f"({c})*e{i + 1}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


class VertexStruct:
    """``V0 + Q_H`` (exact) or the extension model ``E0`` when Lie data is given."""

    def __init__(self, chart, H=None, lie=None, gauge=None, check=True):
        if lie is None and gauge is not None:
            raise VertexError("a gauge needs a Lie algebra")
        if lie is not None and check:
            rep = validate_lie(lie)
            if not rep.passed:
                raise LieSpecError(f"invalid Lie algebra {lie.name}: failed {rep.failed()}")
        q = CourantStruct(chart, H, check=check)
        self._ext = CourantExt(lie if lie is not None else zero_lie(), gauge, q, check=check)
        self.chart = chart
        self.is_extension = lie is not None

    @classmethod
    def _from_ext(cls, ext, is_extension):
        out = cls.__new__(cls)
        out._ext = ext
        out.chart = ext.chart
        out.is_extension = is_extension
        return out

    @property
    def H(self):
        return self._ext.H

    @property
    def lie(self):
        return self._ext.lie if self.is_extension else None

    @property
    def gauge(self):
        return self._ext.gauge if self.is_extension else None

    @property
    def r(self):
        return self._ext.lie.dim

    # -- structure protocol -------------------------------------------------------
    @property
    def nslots(self):
        return 2 * self.chart.n + self.r

    def over(self, chart):
        if chart == self.chart:
            return self
        return type(self)._from_ext(self._ext.over(chart), self.is_extension)

    def element(self, polys):
        n, r = self.chart.n, self.r
        return VertexElem(forms_from(self.chart, 1, polys[:n]), polys[n:n + r], polys[n + r:])

    def anchor(self, v):
        return v.anchor()

    def partial(self, f):
        return VertexElem.of_form(d(f), self.r)

    def act(self, f, v):
        """``f * v``; the frame part picks up ``sum_i (d_i f dg_i + d_i g_i df)``."""
        chart = self.chart
        omega = v.omega.scale(f)
        div = chart.zero()
        corr = DiffForm.zero(chart, 1)
        for i, g in enumerate(v.coeffs):
            if g.is_zero():
                continue
            div = div + g.diff(i)
            fi = f.diff(i)
            if not fi.is_zero():
                corr = corr + d(g).scale(fi)
        if not div.is_zero():
            corr = corr + d(f).scale(div)
        return VertexElem(omega + corr, [f * c for c in v.b], [f * c for c in v.coeffs])

    def frame_pair(self, f, g):
        """``<sum f_i * e_i, sum g_j * e_j>``."""
        n = self.chart.n
        out = -self._second_div(f, g) - self._second_div(g, f)
        for i in range(n):
            if f[i].is_zero():
                continue
            for j in range(n):
                if g[j].is_zero():
                    continue
                out = out - g[j].diff(i) * f[i].diff(j)
        return out

    def _second_div(self, f, g):
        """``sum_ij f_i d_i d_j g_j``."""
        vf = VectorField(self.chart, f)
        return vf(_divergence(self.chart, g))

    def frame_bracket_omega(self, f, g):
        """Omega-part of ``[sum f_i * e_i, sum g_j * e_j]`` without the twist."""
        n = self.chart.n
        out = DiffForm.zero(self.chart, 1)
        for i in range(n):
            if f[i].is_zero():
                continue
            for j in range(n):
                if g[j].is_zero():
                    continue
                c = g[j].diff(i)
                if not c.is_zero():
                    out = out - d(f[i].diff(j)).scale(c)
        D = [_divergence(self.chart, f).diff(j) for j in range(n)]
        for j in range(n):
            if D[j].is_zero() or g[j].is_zero():
                continue
            out = out - d(g[j]).scale(D[j])
            out = out - d(D[j]).scale(g[j])
        return out

    def pair(self, v1, v2):
        x, y = v1.anchor(), v2.anchor()
        out = (contract(y, v1.omega).as_function() + contract(x, v2.omega).as_function()
               + self.frame_pair(v1.coeffs, v2.coeffs))
        if self.r:
            out = out + self._ext.gpair(v1.b, v2.b)
        return out

    def bracket(self, v1, v2):
        E = self._ext
        x, y = v1.anchor(), v2.anchor()
        omega = (lie_derivative(x, v2.omega) - contract(y, d(v1.omega))
                 + self.frame_bracket_omega(v1.coeffs, v2.coeffs))
        if not self.H.is_zero():
            omega = omega + contract(y, contract(x, self.H))
        xy = lie_bracket(x, y)
        b = []
        if self.r:
            omega = omega + E.cocycle(v1.b, v2.b)
            gb = E.gbr(v1.b, v2.b)
            b = [s + t - u for s, t, u in zip(gb, E.nabla(x, v2.b), E.nabla(y, v1.b))]
        return VertexElem(omega, b, xy.comps)

    # -- associated Lie algebroid --------------------------------------------------
    def to_algebroid(self, v):
        """Image in ``g + T``: ``(b + a(pi v), pi v)``."""
        x = v.anchor()
        ax = self._ext.gauge_at(x)
        return ([s + t for s, t in zip(v.b, ax)], x)

    def algebroid_bracket(self, p1, p2):
        return self._ext.algebroid_bracket(p1, p2)

    def frame(self, i):
        return VertexElem.frame(self.chart, i, r=self.r)

    def __repr__(self):
        kind = f"E0({self.lie.name}, a = {self.gauge})" if self.is_extension else "V0"
        return f"{kind} + Q_H(H = {self.H})"


def _divergence(chart, f):
    out = chart.zero()
    for i, c in enumerate(f):
        if not c.is_zero():
            out = out + c.diff(i)
    return out


def vstar(V, f, v):
    return V.act(f, v)


def vbracket(V, v1, v2):
    return V.bracket(v1, v2)


def vpair(V, v1, v2):
    return V.pair(v1, v2)


def nine_axiom_suite(V, degree=2, slice_last=False):
    """The nine vertex axioms plus structural checks on generic elements."""
    from .axioms import Instance, vertex_suite
    rep = vertex_suite(V, degree, f"vertex axioms (D={degree})", slice_last=slice_last)
    inst = Instance(V, degree, 2, 0)
    T = inst.S
    v1, v2 = inst.elements
    lhs = T.to_algebroid(T.bracket(v1, v2))
    rhs = T.algebroid_bracket(T.to_algebroid(v1), T.to_algebroid(v2))
    rep.add("algebroid-morphism", [a - b for a, b in zip(lhs[0], rhs[0])] + [lhs[1] - rhs[1]])
    return rep


# -- push-outs ---------------------------------------------------------------------------

def _as_ext(C):
    if isinstance(C, CourantExt):
        return C
    if isinstance(C, CourantStruct):
        return CourantExt(zero_lie(), None, C, check=False)
    raise VertexError(f"expected a Courant structure, got {type(C).__name__}")


def _same_lie(l1, l2):
    return l1.basis == l2.basis and l1.structure == l2.structure and l1.gram == l2.gram


class _SumModel:
    """Pairs ``(v, c)`` over the same vector field, modulo ``(alpha, -alpha)``."""

    def __init__(self, V, C):
        self.V, self.C = V, C
        self.chart = V.chart

    def act(self, f, p):
        return (self.V.act(f, p[0]), self.C.act(f, p[1]))

    def bracket(self, p, q):
        return (self.V.bracket(p[0], q[0]), self.C.bracket(p[1], q[1]))

    def pair(self, p, q):
        return self.V.pair(p[0], q[0]) + self.C.pair(p[1], q[1])

    def partial(self, f):
        return (self.V.partial(f), ExtElem.zero(self.chart, self.C.lie.dim))

    def normalize(self, p):
        v, c = p
        w = c.omega
        return (v + VertexElem.of_form(w, self.V.r), ExtElem(c.omega - w, c.b, c.xi))


class _DiffModel:
    """Pairs ``(x, v)`` over the same vector field, modulo ``(alpha, alpha)``.

    ``partial f`` is ``(df, 0)``: the literal difference ``(df, -df)`` is
    ``(2 df, 0)`` in the quotient and would violate the pairing axiom.
    """

    def __init__(self, Ahat, V):
        self.A, self.V = Ahat, V
        self.chart = Ahat.chart

    def act(self, f, p):
        return (self.A.act(f, p[0]), self.V.act(f, p[1]))

    def bracket(self, p, q):
        return (self.A.bracket(p[0], q[0]), self.V.bracket(p[1], q[1]))

    def pair(self, p, q):
        return self.A.pair(p[0], q[0]) - self.V.pair(p[1], q[1])

    def partial(self, f):
        return (self.A.partial(f), VertexElem.zero(self.chart))

    def normalize(self, p):
        x, v = p
        w = v.omega
        return (x - VertexElem.of_form(w, self.A.r), v - VertexElem.of_form(w))


def _sum_lifts(model):
    n = model.chart.n
    C = model.C
    return [(model.V.frame(i), ExtElem(DiffForm.zero(model.chart, 1), [model.chart.zero()] * C.lie.dim,
                                       VectorField.coord(model.chart, i))) for i in range(n)]


def vsum(V, C):
    """Normal form of ``V + C`` for a vertex structure ``V`` and a Courant structure ``C``.

    ``C`` is an exact ``Q_H`` (any ``V``) or a Courant extension (``V`` exact);
    the result is again a :class:`VertexStruct`.
    """
    Ce = _as_ext(C)
    if V.chart != Ce.chart:
        raise ChartError("vertex and Courant structures over different charts")
    if V.is_extension and Ce.lie.dim:
        raise VertexError("cannot add a Courant extension to a vertex extension")
    H = frame_curvature(_SumModel(V, Ce), _sum_lifts(_SumModel(V, Ce)))
    if V.is_extension:
        return VertexStruct(V.chart, H, V.lie, V.gauge, check=False)
    if Ce.lie.dim or isinstance(C, CourantExt):
        return VertexStruct(V.chart, H, Ce.lie, Ce.gauge, check=False)
    return VertexStruct(V.chart, H, check=False)


def _sum_embedding(W, V, Ce):
    rV = V.r

    def phi(x):
        chart = x.chart
        bV = x.b if rV else ()
        bC = x.b if Ce.lie.dim else ()
        return (VertexElem(x.omega, bV, x.coeffs),
                ExtElem(DiffForm.zero(chart, 1), bC, VectorField(chart, x.coeffs)))
    return phi


def _compare(rep, name, model, lhs, rhs):
    a = model.normalize(lhs)
    b = model.normalize(rhs)
    rep.add(name, [a[0] - b[0], a[1] - b[1]])


def vsum_check(V, C, degree=1):
    """Verify that :func:`vsum` reproduces the pair model ``(V x_T C) / Omega`` on generic elements."""
    from .axioms import Instance
    Ce = _as_ext(C)
    W = vsum(V, C)
    rep = Report(f"vertex sum (D={degree})")
    rep.data["twist"] = str(W.H)
    inst = Instance(W, degree, 2, 1)
    Wx = inst.S
    model = _SumModel(V.over(inst.chart), Ce.over(inst.chart))
    phi = _sum_embedding(Wx, model.V, model.C)
    u, v = inst.elements
    f = inst.functions[0]
    _compare(rep, "bracket", model, model.bracket(phi(u), phi(v)), phi(Wx.bracket(u, v)))
    rep.add("pairing", model.pair(phi(u), phi(v)) - Wx.pair(u, v))
    _compare(rep, "module", model, model.act(f, phi(u)), phi(Wx.act(f, u)))
    _compare(rep, "partial", model, model.partial(f), phi(Wx.partial(f)))
    return W, rep


def vdiff(Ahat, V):
    """The Courant extension ``Ahat - V`` for a vertex extension ``Ahat`` and an exact ``V``."""
    if not Ahat.is_extension:
        raise VertexError("the first argument must be a vertex extension")
    if V.is_extension:
        raise VertexError("the second argument must be an exact vertex structure")
    if Ahat.chart != V.chart:
        raise ChartError("vertex structures over different charts")
    model = _DiffModel(Ahat, V)
    lifts = [(Ahat.frame(i), V.frame(i)) for i in range(V.chart.n)]
    H = frame_curvature(model, lifts)
    return CourantExt(Ahat.lie, Ahat.gauge, CourantStruct(V.chart, H, check=False), check=False)


def vdiff_check(Ahat, V, degree=1):
    """Verify ``vdiff`` against the pair model and the round trip ``V + (Ahat - V) = Ahat``."""
    from .axioms import Instance
    C = vdiff(Ahat, V)
    rep = Report(f"vertex difference (D={degree})")
    rep.data["twist"] = str(C.H)
    inst = Instance(C, degree, 2, 1)
    Cx = inst.S
    model = _DiffModel(Ahat.over(inst.chart), V.over(inst.chart))
    def phi(u):
        return (VertexElem(u.omega, u.b, u.xi.comps),
                VertexElem(DiffForm.zero(u.chart, 1), (), u.xi.comps))

    u, v = inst.elements
    f = inst.functions[0]
    _compare(rep, "bracket", model, model.bracket(phi(u), phi(v)), phi(Cx.bracket(u, v)))
    rep.add("pairing", model.pair(phi(u), phi(v)) - Cx.pair(u, v))
    _compare(rep, "module", model, model.act(f, phi(u)), phi(Cx.act(f, u)))
    _compare(rep, "partial", model, model.partial(f), phi(Cx.partial(f)))
    # round trip: the sum of V and the difference is Ahat in normal form
    back = vsum(V, C)
    rep.add("round-trip-twist", back.H - Ahat.H)
    rep.add("round-trip-gauge", back.gauge - Ahat.gauge)
    _, rt = vsum_check(V, C, degree)
    for c in rt.checks:
        rep.checks.append(type(c)(f"round-trip-{c.name}", c.passed, c.residual, c.witness))
    return C, rep


# -- the anchorless sector ------------------------------------------------------------------

class AnchorlessSector:
    """The sub-structure ``Omega^1 + g`` of a vertex structure (trivial anchor)."""

    def __init__(self, V):
        self.V = V
        self.chart = V.chart

    @property
    def nslots(self):
        return self.chart.n + self.V.r

    def over(self, chart):
        return AnchorlessSector(self.V.over(chart))

    def element(self, polys):
        n, r = self.chart.n, self.V.r
        return VertexElem(forms_from(self.chart, 1, polys[:n]), polys[n:n + r],
                          [self.chart.zero()] * n)

    def bracket(self, u, v):
        return self.V.bracket(u, v)

    def pair(self, u, v):
        return self.V.pair(u, v)

    def anchor(self, u):
        return u.anchor()

    def act(self, f, u):
        return self.V.act(f, u)

    def partial(self, f):
        return self.V.partial(f)


def anchorless_sector_check(V, degree=2):
    """The Courant axioms on the anchor-free sector, where ``*`` is an honest module action."""
    from .axioms import courant_suite
    return courant_suite(AnchorlessSector(V), degree, f"anchorless sector (D={degree})")


# -- the canonical pairing on End(Omega^1) --------------------------------------------------

def ip_formula(beta1, xi1, beta2, xi2):
    """The surviving pairing term ``-(i_xi1 beta2)(i_xi2 beta1)`` on rank-one endomorphisms."""
    return -(contract(xi1, beta2).as_function() * contract(xi2, beta1).as_function())


def canonical_pairing_check(n, degree=1):
    """Compare the pairing formula on ``End(Omega^1)`` with minus the trace form.

    Rank-one endomorphisms ``beta (x) xi`` act by ``w -> (i_xi w) beta``.
    Checks generic rank-one pairs, the bilinear extension to generic matrices
    and the built-in ``atiyah-cotangent`` gram.
    """
    from .liestruct import atiyah_cotangent
    from .symcalc.ratfunc import Chart
    if n < 1:
        raise VertexError("chart dimension must be positive")
    base = Chart("U", tuple(f"x{i + 1}" for i in range(n)))
    rep = Report(f"canonical pairing (n={n})")
    space = GenericSpace(base, degree, prefix="c")
    slots = [space.reserve(n) for _ in range(4)]
    chart, polys = space.realize()
    beta1, xi1, beta2, xi2 = [[polys[k] for k in s] for s in slots]
    b1, b2 = forms_from(chart, 1, beta1), forms_from(chart, 1, beta2)
    v1, v2 = VectorField(chart, xi1), VectorField(chart, xi2)

    def endo(beta, xi):
        # matrix in the coframe basis: column j is the image of dx_j
        return [[beta[i] * xi[j] for j in range(n)] for i in range(n)]

    def trace_prod(m1, m2):
        out = chart.zero()
        for i in range(n):
            for k in range(n):
                out = out + m1[i][k] * m2[k][i]
        return out

    rep.add("rank-one", ip_formula(b1, v1, b2, v2) + trace_prod(endo(beta1, xi1), endo(beta2, xi2)))
    rep.add("symmetry", ip_formula(b1, v1, b2, v2) - ip_formula(b2, v2, b1, v1))

    mspace = GenericSpace(base, 0, prefix="m")
    ms = [mspace.reserve(n * n) for _ in range(2)]
    mchart, mp = mspace.realize()
    M = [[[mp[s[i * n + j]] for j in range(n)] for i in range(n)] for s in ms]
    dxs = [DiffForm.dx(mchart, i) for i in range(n)]
    ds = [VectorField.coord(mchart, j) for j in range(n)]
    total = mchart.zero()
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    total = total + M[0][i][j] * M[1][k][l] * ip_formula(dxs[i], ds[j], dxs[k], ds[l])
    tr = mchart.zero()
    for i in range(n):
        for k in range(n):
            tr = tr + M[0][i][k] * M[1][k][i]
    rep.add("bilinear", total + tr)

    lie = atiyah_cotangent(n)
    bad = None
    for a in range(lie.dim):
        i, j = divmod(a, n)
        for b in range(lie.dim):
            k, l = divmod(b, n)
            val = ip_formula(dxs[i], ds[j], dxs[k], ds[l])
            if val != mchart.const(lie.gram[a][b]):
                bad = f"{lie.basis[a]}, {lie.basis[b]}"
                break
        if bad:
            break
    rep.add("gram", bad is None, witness=bad or "")
    rep.data["formula"] = "-(i_xi1 beta2)(i_xi2 beta1)"
    return rep


__all__ = [
    "AnchorlessSector", "VertexElem", "VertexError", "VertexStruct", "anchorless_sector_check",
    "canonical_pairing_check", "ip_formula", "nine_axiom_suite", "vbracket", "vdiff",
    "vdiff_check", "vpair", "vstar", "vsum", "vsum_check",
]
