"""Generic-element builders shared by the tests."""

from itertools import combinations

from algebroids.liestruct import GForm, mat_mul, maurer_cartan_form
from algebroids.symcalc import DiffForm, GenericSpace


def generic_gforms(chart, lie, specs, degree=1, prefix="g"):
    """Generic g-valued forms sharing one parameter chart.

    ``specs`` lists form degrees; each component coefficient is a generic
    polynomial of degree <= ``degree``.
    """
    space = GenericSpace(chart, degree, prefix)
    slots = []
    for p in specs:
        idxs = list(combinations(range(chart.n), p))
        slots.append((p, idxs, [space.reserve(len(idxs)) for _ in range(lie.dim)]))
    ext, polys = space.realize()
    out = []
    for p, idxs, comp_slots in slots:
        comps = [DiffForm(ext, p, {idx: polys[k] for idx, k in zip(idxs, s)}) for s in comp_slots]
        out.append(GForm(ext, lie, comps, p))
    return ext, out


def unipotent_product(chart, u, v, w):
    """``[[1,u],[0,1]] [[1,0],[v,1]] [[1,w],[0,1]]`` as a matrix of RatFuncs."""
    one, zero = chart.one(), chart.zero()
    return mat_mul(mat_mul([[one, u], [zero, one]], [[one, zero], [v, one]]), [[one, w], [zero, one]])


def pure_gauge(chart, lie, u, v, w):
    return maurer_cartan_form(unipotent_product(chart, u, v, w), lie, chart)


def symbolic_pure_gauge(chart, lie, names=("p", "q", "r")):
    """``g^-1 dg`` with ``g`` built from ``p*x1``, ``q*x2``, ``r*x3`` (symbolic p, q, r)."""
    ext = chart.with_params(names)
    p, q, r = (ext.symbol(n) for n in names)
    x = ext.coords()
    return ext, pure_gauge(ext, lie, p * x[0], q * x[1 % chart.n], r * x[2 % chart.n])
