"""Differential forms, vector fields and the Cartan operations on a chart.

Forms are stored sparsely as ``{(i1<...<ik): coefficient}``.  All sign
bookkeeping lives in :func:`_merge` (wedge), :func:`d` and :func:`contract`.
Evaluation follows the determinant convention, so
``contract(d/dx1, dx1^dx2) == dx2``.
"""

from __future__ import annotations

from fractions import Fraction

from .ratfunc import ChartError, RatFunc


def _merge(a, b):
    """Sign and sorted union of two increasing index tuples, or (0, None)."""
    if set(a) & set(b):
        return 0, None
    inversions = 0
    for i in a:
        for j in b:
            if i > j:
                inversions += 1
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


class DiffForm:
    """A differential form of fixed degree with RatFunc coefficients."""

    __slots__ = ("chart", "degree", "_terms")

    def __init__(self, chart, degree, terms=None):
        self.chart = chart
        self.degree = degree
        clean = {}
        if degree <= chart.n and terms:
            for idx, c in terms.items():
                idx = tuple(idx)
                if len(idx) != degree or list(idx) != sorted(set(idx)):
                    raise ValueError(f"bad index tuple {idx} for a {degree}-form")
                if c.chart != chart:
                    raise ChartError("coefficient chart mismatch")
                if not c.is_zero():
                    clean[idx] = c
        self._terms = clean

    # -- construction ----------------------------------------------------
    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree)

    @classmethod
    def function(cls, f):
        return cls(f.chart, 0, {(): f})

    @classmethod
    def basis(cls, chart, idx, coeff=None):
        """``coeff * dx_{i1} ^ ... ^ dx_{ik}`` for an arbitrary index tuple."""
        coeff = chart.one() if coeff is None else coeff
        sign, key = 1, ()
        for i in idx:
            s, key = _merge(key, (i,))
            if key is None:
                return cls(chart, len(idx))
            sign *= s
        return cls(chart, len(idx), {key: coeff * sign})

    @classmethod
    def dx(cls, chart, i):
        if isinstance(i, str):
            i = chart.index(i)
        return cls(chart, 1, {(i,): chart.one()})

    # -- access ------------------------------------------------------------
    @property
    def terms(self):
        return dict(self._terms)

    def coeff(self, idx):
        """Coefficient of the increasing index tuple ``idx`` (zero if absent)."""
        return self._terms.get(tuple(idx), self.chart.zero())

    def items(self):
        return sorted(self._terms.items())

    def is_zero(self):
        return not self._terms

    def as_function(self):
        if self.degree != 0:
            raise ValueError("not a 0-form")
        return self.coeff(())

    def lift(self, chart):
        return DiffForm(chart, self.degree,
                        {k: v.lift(chart) for k, v in self._terms.items()})

    def map_coeffs(self, fn):
        return DiffForm(self.chart, self.degree,
                        {k: fn(v) for k, v in self._terms.items()})

    # -- linear structure --------------------------------------------------
    def _check(self, other):
        if not isinstance(other, DiffForm):
            raise TypeError(f"expected a DiffForm, got {type(other).__name__}")
        if other.chart != self.chart:
            raise ChartError(f"chart mismatch: {self.chart} vs {other.chart}")
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other):
        if isinstance(other, RatFunc) and self.degree == 0:
            other = DiffForm.function(other)
        self._check(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out[k] + v if k in out else v
        return DiffForm(self.chart, self.degree, out)

    def __neg__(self):
        return DiffForm(self.chart, self.degree, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        if isinstance(f, (int, Fraction)):
            if f == 0:
                return DiffForm(self.chart, self.degree)
            return DiffForm(self.chart, self.degree,
                            {k: v * f for k, v in self._terms.items()})
        if f.chart != self.chart:
            raise ChartError("scalar chart mismatch")
        return DiffForm(self.chart, self.degree, {k: v * f for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, DiffForm):
            return wedge(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return (self.chart == other.chart and self.degree == other.degree
                and self._terms == other._terms)

    def __hash__(self):
        return hash((self.chart, self.degree, tuple(self.items())))

    def __str__(self):
        from .printing import format_form
        return format_form(self)

    def __repr__(self):
        return f"DiffForm<{self.degree}>({self})"


class VectorField:
    """A derivation ``sum_i comps[i] d/dx_i``."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart, comps):
        comps = tuple(comps)
        if len(comps) != chart.n:
            raise ValueError(f"expected {chart.n} components, got {len(comps)}")
        for c in comps:
            if c.chart != chart:
                raise ChartError("component chart mismatch")
        self.chart = chart
        self.comps = comps

    @classmethod
    def zero(cls, chart):
        return cls(chart, [chart.zero()] * chart.n)

    @classmethod
    def coord(cls, chart, i, coeff=None):
        """``coeff * d/dx_i``."""
        if isinstance(i, str):
            i = chart.index(i)
        comps = [chart.zero()] * chart.n
        comps[i] = chart.one() if coeff is None else coeff
        return cls(chart, comps)

    def __call__(self, f):
        """Apply the derivation to a function."""
        out = self.chart.zero()
        for i, c in enumerate(self.comps):
            if not c.is_zero():
                out = out + c * f.diff(i)
        return out

    def is_zero(self):
        return all(c.is_zero() for c in self.comps)

    def lift(self, chart):
        return VectorField(chart, [c.lift(chart) for c in self.comps])

    def __add__(self, other):
        return VectorField(self.chart, [a + b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return VectorField(self.chart, [-a for a in self.comps])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        return VectorField(self.chart, [a * f for a in self.comps])

    def __mul__(self, f):
        return self.scale(f)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and self.comps == other.comps

    def __hash__(self):
        return hash((self.chart, self.comps))

    def __str__(self):
        from .printing import format_vector
        return format_vector(self)

    def __repr__(self):
        return f"VectorField({self})"


def _as_form(x):
    if isinstance(x, RatFunc):
        return DiffForm.function(x)
    return x


def d(x):
    """Exterior derivative of a function or form."""
    x = _as_form(x)
    chart = x.chart
    out = {}
    for idx, f in x._terms.items():
        for i in range(chart.n):
            if i in idx:
                continue
            df = f.diff(i)
            if df.is_zero():
                continue
            pos = sum(1 for j in idx if j < i)
            key = tuple(sorted(idx + (i,)))
            term = -df if pos % 2 else df
            out[key] = out[key] + term if key in out else term
    return DiffForm(chart, x.degree + 1, out)


def wedge(a, b):
    """Exterior product; 0-forms and RatFuncs act as scalars."""
    a, b = _as_form(a), _as_form(b)
    if a.chart != b.chart:
        raise ChartError(f"chart mismatch: {a.chart} vs {b.chart}")
    out = {}
    for ia, fa in a._terms.items():
        for ib, fb in b._terms.items():
            sign, key = _merge(ia, ib)
            if not sign:
                continue
            term = fa * fb
            if sign < 0:
                term = -term
            out[key] = out[key] + term if key in out else term
    return DiffForm(a.chart, a.degree + b.degree, out)


def contract(xi, form):
    """Interior product ``iota_xi form``."""
    form = _as_form(form)
    if form.degree == 0:
        raise ValueError("cannot contract a 0-form")
    if xi.chart != form.chart:
        raise ChartError("chart mismatch in contraction")
    out = {}
    for idx, f in form._terms.items():
        for pos, i in enumerate(idx):
            c = xi.comps[i]
            if c.is_zero():
                continue
            key = idx[:pos] + idx[pos + 1:]
            term = f * c
            if pos % 2:
                term = -term
            out[key] = out[key] + term if key in out else term
    return DiffForm(form.chart, form.degree - 1, out)


def lie_bracket(xi, eta):
    """Commutator of vector fields."""
    if xi.chart != eta.chart:
        raise ChartError("chart mismatch in Lie bracket")
    return VectorField(xi.chart, [xi(b) - eta(a) for a, b in zip(xi.comps, eta.comps)])


def lie_derivative(xi, form):
    """``L_xi = iota_xi d + d iota_xi``; on functions this is ``xi(f)``."""
    if isinstance(form, RatFunc):
        return xi(form)
    if form.degree == 0:
        return DiffForm.function(xi(form.as_function()))
    return contract(xi, d(form)) + d(contract(xi, form))


def evaluate(form, *fields):
    """Value of a k-form on k vector fields (determinant convention)."""
    out = form
    for xi in fields:
        out = contract(xi, out)
    return out.as_function()


def iota2(xi1, xi2, form):
    """``iota_{xi2} iota_{xi1} form``, i.e. ``form(xi1, xi2, .)``."""
    return contract(xi2, contract(xi1, form))
