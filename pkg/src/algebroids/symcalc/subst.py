"""Substitutions between charts and pullback of functions and forms."""

from __future__ import annotations

from .forms import DiffForm, d, wedge
from .ratfunc import ChartError, RatFunc


class Substitution:
    """Express each source coordinate as a RatFunc over the target chart.

    Source parameters are carried to the target parameters of the same name.
    """

    __slots__ = ("source", "target", "assignment")

    def __init__(self, source, target, assignment):
        self.source = source
        self.target = target
        assignment = dict(assignment)
        missing = [v for v in source.vars if v not in assignment]
        if missing:
            raise ChartError(f"substitution {source.name}->{target.name} misses {missing}")
        extra = [v for v in assignment if v not in source.vars]
        if extra:
            raise ChartError(f"substitution assigns unknown variables {extra}")
        for p in source.params:
            if p not in target.names:
                raise ChartError(f"parameter {p!r} not available on {target.name}")
        self.assignment = {}
        for v, img in assignment.items():
            if img.chart != target:
                img = img.lift(target) if set(img.chart.names) <= set(target.names) else None
                if img is None:
                    raise ChartError("substitution image over a foreign chart")
            self.assignment[v] = img

    @classmethod
    def identity(cls, source, target=None):
        target = source if target is None else target
        return cls(source, target, {v: target.symbol(v) for v in source.vars})

    def images(self):
        imgs = [self.assignment[v] for v in self.source.vars]
        imgs += [self.target.symbol(p) for p in self.source.params]
        return imgs

    # -- application ----------------------------------------------------------
    def apply(self, f):
        """Pull back a RatFunc."""
        if f.chart != self.source:
            f = f.lift(self.source) if set(f.chart.names) <= set(self.source.names) else None
            if f is None:
                raise ChartError("function is not over the substitution source")
        imgs = self.images()
        ctx = self.target.ctx
        if all(g.is_polynomial() for g in imgs):
            polys = [g.num for g in imgs]
            num = f.num.compose(*polys, ctx=ctx)
            den = f.den.compose(*polys, ctx=ctx)
        else:
            num_pow = _powers(imgs, f.num, f.den)
            num = _eval_homogenized(f.num, imgs, num_pow, ctx)
            den = _eval_homogenized(f.den, imgs, num_pow, ctx)
        if den.is_zero():
            raise ZeroDivisionError("substitution makes a denominator vanish identically")
        return RatFunc(self.target, num, den)

    __call__ = apply

    def pullback(self, form):
        """Pull back a form: coefficients by :meth:`apply`, ``dx_i -> d(s(x_i))``."""
        if isinstance(form, RatFunc):
            return self.apply(form)
        if form.chart != self.source:
            form = form.lift(self.source)
        dimgs = [d(self.assignment[v]) for v in self.source.vars]
        out = DiffForm.zero(self.target, form.degree)
        for idx, c in form.items():
            term = DiffForm.function(self.apply(c))
            for i in idx:
                term = wedge(term, dimgs[i])
            out = out + term
        return out

    def jacobian(self):
        """``J[i][j] = d s(x_i) / d y_j`` with ``y`` the target coordinates."""
        return [[self.assignment[v].diff(j) for j in range(self.target.n)]
                for v in self.source.vars]

    def then(self, other):
        """Substitution pulling back along ``self`` and then ``other``."""
        if other.source != self.target:
            raise ChartError("substitutions do not compose")
        return Substitution(self.source, other.target,
                            {v: other.apply(img) for v, img in self.assignment.items()})

    def __eq__(self, other):
        if not isinstance(other, Substitution):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.assignment == other.assignment)

    def __hash__(self):
        return hash((self.source, self.target, tuple(sorted(self.assignment.items(), key=lambda kv: kv[0]))))

    def __repr__(self):
        body = ", ".join(f"{v}={self.assignment[v]}" for v in self.source.vars)
        return f"Substitution({self.source.name}->{self.target.name}: {body})"


def pullback(s, form):
    return s.pullback(form)


def _powers(imgs, *polys):
    """Maximal exponent of each variable across the given polynomials."""
    top = [0] * len(imgs)
    for p in polys:
        for i, e in enumerate(p.degrees()):
            top[i] = max(top[i], e)
    return top


def _eval_homogenized(poly, imgs, top, ctx):
    """``poly(a/b) * prod b_i^top_i`` as a polynomial over ``ctx``."""
    nums = [g.num for g in imgs]
    dens = [g.den for g in imgs]
    cache = {}

    def power(kind, i, k):
        key = (kind, i, k)
        if key not in cache:
            base = nums[i] if kind == "n" else dens[i]
            cache[key] = base ** k
        return cache[key]

    total = ctx.constant(0)
    for exps, c in poly.terms():
        term = ctx.constant(c)
        for i, e in enumerate(exps):
            if e:
                term = term * power("n", i, e)
            if top[i] - e:
                term = term * power("d", i, top[i] - e)
        total = total + term
    return total

