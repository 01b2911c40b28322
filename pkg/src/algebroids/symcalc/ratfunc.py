"""Charts and exact rational functions.

A :class:`Chart` names the coordinates ``x_1 .. x_n`` of a coordinate patch,
optionally followed by symbolic parameters (treated as constants by every
differential operator).  A :class:`RatFunc` is a quotient of two
``fmpq_mpoly`` polynomials in the chart's variables, kept in canonical form:
numerator and denominator are coprime and the denominator has leading
coefficient 1 under the graded-lexicographic order.  Canonical form makes
equality of rational functions a structural comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import flint

ORDERING = "deglex"


class ChartError(ValueError):
    """Raised when values from incompatible charts are combined."""


@lru_cache(maxsize=None)
def _context(names):
    return flint.fmpq_mpoly_ctx.get(names, ORDERING)


@dataclass(frozen=True)
class Chart:
    """A coordinate patch.

    ``vars`` are the coordinates.  ``params`` are extra symbols that behave as
    constants (used for generic elements and symbolic fixtures).  ``units``
    lists coordinates that are invertible on the patch; they only matter for
    the Laurent search space of the coboundary solver.
    """

    name: str
    vars: tuple
    params: tuple = ()
    units: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "units", tuple(self.units))
        if len(self.vars) < 1:
            raise ChartError(f"chart {self.name!r} needs at least one coordinate")
        names = self.vars + self.params
        if len(set(names)) != len(names):
            raise ChartError(f"chart {self.name!r} has repeated variable names")
        for u in self.units:
            if u not in self.vars:
                raise ChartError(f"unit {u!r} is not a coordinate of {self.name!r}")

    @property
    def n(self):
        return len(self.vars)

    @property
    def names(self):
        return self.vars + self.params

    @property
    def ctx(self):
        return _context(self.names)

    def index(self, var):
        return self.vars.index(var)

    # -- constructors ---------------------------------------------------
    def const(self, value):
        return RatFunc.constant(self, value)

    def zero(self):
        return RatFunc.constant(self, 0)

    def one(self):
        return RatFunc.constant(self, 1)

    def var(self, which):
        """Coordinate ``which`` (index or name) as a RatFunc."""
        if isinstance(which, int):
            which = self.vars[which]
        return self.symbol(which)

    def coords(self):
        return [self.symbol(v) for v in self.vars]

    def symbol(self, name):
        if name not in self.names:
            raise ChartError(f"{name!r} is not a variable of chart {self.name!r}")
        return RatFunc(self, self.ctx.gen(self.names.index(name)))

    def with_params(self, params):
        """Same coordinates with ``params`` appended to the parameter list."""
        extra = tuple(p for p in params if p not in self.params)
        return Chart(self.name, self.vars, self.params + extra, self.units)

    def base(self):
        return Chart(self.name, self.vars, (), self.units)

    def __str__(self):
        return f"{self.name}({', '.join(self.vars)})"


def _as_fmpq(value):
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, int):
        return flint.fmpq(value)
    if isinstance(value, flint.fmpq):
        return value
    raise TypeError(f"not an exact rational: {value!r}")


class RatFunc:
    """Canonical quotient ``num/den`` of polynomials over a chart."""

    __slots__ = ("chart", "num", "den")

    def __init__(self, chart, num, den=None, *, canonical=False):
        self.chart = chart
        if den is None:
            self.num = num
            self.den = chart.ctx.constant(1)
            return
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not canonical:
            num, den = _canonical(num, den)
        self.num = num
        self.den = den

    # -- construction ------------------------------------------------------
    @classmethod
    def constant(cls, chart, value):
        return cls(chart, chart.ctx.constant(_as_fmpq(value)))

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            if other.chart != self.chart:
                raise ChartError(f"chart mismatch: {self.chart} vs {other.chart}")
            return other
        if isinstance(other, (int, Fraction, flint.fmpq)):
            return RatFunc.constant(self.chart, other)
        return NotImplemented

    def lift(self, chart):
        """Reinterpret in a chart whose variable list contains ours."""
        if chart == self.chart:
            return self
        missing = [v for v in self.chart.names if v not in chart.names]
        if missing:
            raise ChartError(f"cannot lift to {chart}: missing {missing}")
        ctx = chart.ctx
        return RatFunc(chart, self.num.project_to_context(ctx),
                       self.den.project_to_context(ctx), canonical=True)

    # -- predicates ----------------------------------------------------
    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.is_one()

    def is_constant(self):
        return self.den.is_one() and self.num.total_degree() <= 0

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        if self.num.is_zero():
            return Fraction(0)
        c = self.num.coeffs()[0]
        return Fraction(int(c.p), int(c.q))

    def depends_on(self, names):
        idx = [self.chart.names.index(v) for v in names if v in self.chart.names]
        for poly in (self.num, self.den):
            degs = poly.degrees()
            if any(degs[i] > 0 for i in idx):
                return True
        return False

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den.is_one() and other.den.is_one():
            return RatFunc(self.chart, self.num + other.num)
        if self.den == other.den:
            return RatFunc(self.chart, self.num + other.num, self.den)
        return RatFunc(self.chart, self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(self.chart, -self.num, self.den, canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            if other == 0:
                return self.chart.zero()
            return RatFunc(self.chart, self.num * _as_fmpq(other), self.den,
                           canonical=True)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den.is_one() and other.den.is_one():
            return RatFunc(self.chart, self.num * other.num)
        return RatFunc(self.chart, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.chart, self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("exponent must be an integer")
        if k < 0:
            return self.inverse() ** (-k)
        return RatFunc(self.chart, self.num ** k, self.den ** k, canonical=True)

    # -- calculus ------------------------------------------------------
    def diff(self, i):
        """Partial derivative along coordinate ``i`` (index or name)."""
        if isinstance(i, str):
            i = self.chart.index(i)
        if self.den.is_one():
            return RatFunc(self.chart, self.num.derivative(i))
        dn = self.num.derivative(i)
        dd = self.den.derivative(i)
        return RatFunc(self.chart, dn * self.den - self.num * dd, self.den * self.den)

    # -- comparison ------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RatFunc.constant(self.chart, other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return (self.chart == other.chart and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        return hash((self.chart, str(self.num), str(self.den)))

    def __bool__(self):
        return not self.is_zero()

    # -- printing ------------------------------------------------------
    def __str__(self):
        num = str(self.num)
        if self.den.is_one():
            return num
        return f"({num})/({self.den})"

    def __repr__(self):
        return f"RatFunc({self})"

    def nterms(self):
        return len(self.num) + len(self.den)


def _canonical(num, den):
    if num.is_zero():
        return num, den.context().constant(1)
    if den.total_degree() > 0:
        g = num.gcd(den)
        if not g.is_one() and g.total_degree() > 0:
            num = num / g
            den = den / g
    lc = den.leading_coefficient()
    if lc != 1:
        inv = 1 / lc
        num = num * inv
        den = den * inv
    return num, den
