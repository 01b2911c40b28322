"""Sparse exact Gaussian elimination with rank certificates.

Matrix entries are :class:`fractions.Fraction`.  Right-hand sides may be
Fractions or polynomials in symbolic parameters (anything supporting ``+``,
``-``, multiplication by a rational and ``is_zero``), so a parametric family
of right-hand sides is solved in one pass.

Rows are reduced incrementally; every stored pivot row has all its columns at
or after its pivot column, so eliminating in increasing column order
terminates.  When the system is inconsistent the solver returns a left kernel
vector ``y`` with ``y A = 0`` and ``y b != 0``, which anyone can re-check.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction

import flint


def _scale(value, q):
    if isinstance(value, Fraction):
        return value * q
    return value * flint.fmpq(q.numerator, q.denominator)


def _is_zero(value):
    if isinstance(value, Fraction):
        return value == 0
    return value.is_zero()


@dataclass
class Certificate:
    """Evidence about a linear system ``A x = b``."""

    nrows: int
    ncols: int
    rank: int
    augmented_rank: int
    left_kernel: dict = field(default_factory=dict)

    @property
    def consistent(self):
        return self.rank == self.augmented_rank

    def to_dict(self):
        return {
            "rows": self.nrows,
            "columns": self.ncols,
            "rank": self.rank,
            "augmented_rank": self.augmented_rank,
            "witness_rows": len(self.left_kernel),
        }


@dataclass
class Solution:
    values: dict | None
    certificate: Certificate

    @property
    def found(self):
        return self.values is not None


def solve(rows, rhs, ncols, zero, track=True):
    """Solve a sparse system.

    ``rows`` is a list of ``{column: Fraction}`` dicts, ``rhs`` the matching
    right-hand sides and ``zero`` the additive identity of the rhs type.
    Free variables are set to zero.  Returns :class:`Solution` whose values
    map every column with a nonzero value to it (``None`` if inconsistent).
    """
    pivots = {}
    witness = None
    rank = 0
    for r, (row, b) in enumerate(zip(rows, rhs)):
        row = {c: Fraction(v) for c, v in row.items() if v != 0}
        combo = {r: Fraction(1)} if track else None
        heap = list(row)
        heapq.heapify(heap)
        seen = set()
        while heap:
            c = heapq.heappop(heap)
            if c in seen:
                continue
            seen.add(c)
            coef = row.get(c)
            if coef is None or c not in pivots:
                continue
            prow, pb, pcombo = pivots[c]
            for k, v in prow.items():
                nv = row.get(k, 0) - coef * v
                if nv == 0:
                    row.pop(k, None)
                else:
                    if k not in row:
                        heapq.heappush(heap, k)
                    row[k] = nv
            b = b - _scale(pb, coef)
            if track:
                for k, v in pcombo.items():
                    nv = combo.get(k, 0) - coef * v
                    if nv == 0:
                        combo.pop(k, None)
                    else:
                        combo[k] = nv
        if row:
            p = min(row)
            inv = 1 / row[p]
            row = {k: v * inv for k, v in row.items()}
            b = _scale(b, inv)
            if track:
                combo = {k: v * inv for k, v in combo.items()}
            pivots[p] = (row, b, combo)
            rank += 1
        elif not _is_zero(b) and witness is None:
            witness = combo if track else {}
    cert = Certificate(len(rows), ncols, rank, rank + (1 if witness is not None else 0),
                       witness or {})
    if witness is not None:
        return Solution(None, cert)
    values = {}
    for p in sorted(pivots, reverse=True):
        row, b, _ = pivots[p]
        acc = b
        for k, v in row.items():
            if k != p and k in values:
                acc = acc - _scale(values[k], v)
        if not _is_zero(acc):
            values[p] = acc
    return Solution(values, cert)


def rank(rows, ncols):
    """Rank of a sparse rational matrix."""
    sol = solve(rows, [Fraction(0)] * len(rows), ncols, Fraction(0), track=False)
    return sol.certificate.rank


def check_left_kernel(rows, rhs, y):
    """Verify an inconsistency witness: ``y A = 0`` and ``y b != 0``."""
    acc = {}
    for r, coef in y.items():
        for c, v in rows[r].items():
            acc[c] = acc.get(c, 0) + coef * v
    if any(v != 0 for v in acc.values()):
        return False
    total = None
    for r, coef in y.items():
        term = _scale(rhs[r], coef)
        total = term if total is None else total + term
    return total is not None and not _is_zero(total)


class LinearizationError(ValueError):
    """The residuals are not affine-linear in the unknowns with rational coefficients."""


def linearize(residuals, unknowns):
    """Turn ``residual == 0`` conditions into a sparse system ``A u = b``.

    Each residual is a RatFunc over a chart whose names include the unknown
    symbols (given as a list; their position is the column index).  The
    residual must be affine in the unknowns with unknown coefficients free of
    other parameters, and its denominator must not involve the unknowns or
    parameters.  One equation is produced per coordinate monomial of each
    numerator.  Parameters other than unknowns end up in the right-hand side,
    represented as polynomials over a parameter-only context.
    """
    col = {u: k for k, u in enumerate(unknowns)}
    par_all = []
    for res in residuals:
        for v in res.chart.params:
            if v not in col and v not in par_all:
                par_all.append(v)
    pctx = flint.fmpq_mpoly_ctx.get(tuple(par_all), "deglex") if par_all else None
    rows, rhs, keys = [], [], []
    for r, res in enumerate(residuals):
        chart = res.chart
        names = chart.names
        n = chart.n
        unk_pos = [i for i, v in enumerate(names) if v in col]
        par_pos = [i for i, v in enumerate(names) if i >= n and v not in col]
        par_slot = [par_all.index(names[i]) for i in par_pos]
        if res.den.total_degree() > 0:
            degs = res.den.degrees()
            if any(degs[i] for i in unk_pos + par_pos):
                raise LinearizationError("denominator depends on unknowns or parameters")
        local = {}
        for exps, c in res.num.terms():
            key = exps[:n]
            entry = local.setdefault(key, [{}, {}])
            unk = [(i, exps[i]) for i in unk_pos if exps[i]]
            if len(unk) > 1 or (unk and unk[0][1] > 1):
                raise LinearizationError("residual is not linear in the unknowns")
            if unk:
                if any(exps[i] for i in par_pos):
                    raise LinearizationError("unknown multiplied by a parameter")
                k = col[names[unk[0][0]]]
                entry[0][k] = entry[0].get(k, Fraction(0)) + Fraction(int(c.p), int(c.q))
            else:
                pk = [0] * len(par_all)
                for i, s in zip(par_pos, par_slot):
                    pk[s] = exps[i]
                pk = tuple(pk)
                entry[1][pk] = entry[1].get(pk, 0) + c
        for key in sorted(local):
            row, const = local[key]
            row = {k: v for k, v in row.items() if v != 0}
            if pctx is None:
                b = -sum((Fraction(int(c.p), int(c.q)) for c in const.values()), Fraction(0))
            else:
                b = -pctx.from_dict({k: v for k, v in const.items() if v != 0})
            if not row and _is_zero(b):
                continue
            rows.append(row)
            rhs.append(b)
            keys.append((r, key))
    zero = Fraction(0) if pctx is None else pctx.constant(0)
    return rows, rhs, keys, zero


def value_on_chart(value, chart):
    """A solved value (rational or parameter polynomial) as a RatFunc on ``chart``."""
    from .symcalc import RatFunc
    if isinstance(value, Fraction):
        return chart.const(value)
    return RatFunc(chart, value.project_to_context(chart.ctx))
