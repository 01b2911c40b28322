"""Text rendering of rational functions, forms and vector fields.

The output is accepted by :mod:`algebroids.symcalc.parse`, and printing a
parsed value reproduces the same text.
"""

from __future__ import annotations


def _atomic(f):
    """True when ``str(f)`` can be used as a factor without parentheses."""
    if not f.is_polynomial():
        return False
    return len(f.num) == 1


def format_coeff_times(f, word):
    """Render ``f * word``; returns (sign, body) with body unsigned."""
    text = str(f)
    if text == "1":
        return "+", word
    if text == "-1":
        return "-", word
    if _atomic(f):
        if text.startswith("-"):
            return "-", f"{text[1:]}*{word}"
        return "+", f"{text}*{word}"
    return "+", f"({text})*{word}"


def join_signed(parts):
    if not parts:
        return "0"
    out = []
    for k, (sign, body) in enumerate(parts):
        if k == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def basis_word(chart, idx, prefix="d"):
    return "^".join(f"{prefix}{chart.vars[i]}" for i in idx)


def format_form(form):
    if form.degree == 0:
        return str(form.as_function())
    parts = [format_coeff_times(c, basis_word(form.chart, idx)) for idx, c in form.items()]
    return join_signed(parts)


def format_vector(xi):
    parts = []
    for i, c in enumerate(xi.comps):
        if not c.is_zero():
            parts.append(format_coeff_times(c, f"d/d{xi.chart.vars[i]}"))
    return join_signed(parts)
