"""Recursive-descent parser for rational expressions and form expressions.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := rational | ident | '(' expr ')'

A leading sign on a factor is also accepted, so printed output such as
``-1/2*x2 + x1`` parses back.  In form mode an identifier ``d<var>`` denotes
the coordinate 1-form and ``dx1^dx2`` the wedge of such words; ``*`` between
forms is the wedge product.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .forms import DiffForm, wedge
from .ratfunc import RatFunc

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


class ParseError(ValueError):
    """Syntax or semantic error with a character position."""

    def __init__(self, message, position, text=""):
        self.message = message
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class _Parser:
    def __init__(self, text, chart, forms):
        self.text = text
        self.chart = chart
        self.forms = forms
        self.tokens = self._tokenize()
        self.pos = 0

    # -- lexing ------------------------------------------------------------
    def _tokenize(self):
        toks = []
        text = self.text
        i = 0
        while i < len(text):
            m = _TOKEN.match(text, i)
            if m is None or m.end() == i:
                break
            start = m.start(m.lastindex) if m.lastindex else m.end()
            if m.group(1) is not None:
                toks.append(("num", int(m.group(1)), start))
            elif m.group(2) is not None:
                word = m.group(2)
                idx = self._dword(word)
                if idx is not None:
                    end = m.end()
                    seq = [idx]
                    while True:
                        m2 = re.match(r"\s*\^\s*([A-Za-z_][A-Za-z0-9_]*)", text[end:])
                        if not m2:
                            break
                        nxt = self._dword(m2.group(1))
                        if nxt is None:
                            break
                        seq.append(nxt)
                        end += m2.end()
                    toks.append(("form", tuple(seq), start))
                    i = end
                    continue
                toks.append(("ident", word, start))
            else:
                ch = m.group(3)
                if ch in "+-*/^()":
                    toks.append(("op", ch, start))
                else:
                    raise ParseError(f"unexpected character {ch!r}", start, text)
            i = m.end()
        toks.append(("end", None, len(text)))
        return toks

    def _dword(self, word):
        if not self.forms or word in self.chart.names or not word.startswith("d"):
            return None
        name = word[1:]
        if name in self.chart.vars:
            return self.chart.index(name)
        return None

    # -- helpers ------------------------------------------------------------
    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        where = "end of input" if tok[0] == "end" else f"{tok[1]!r}"
        raise ParseError(f"{msg} (found {where})", tok[2], self.text)

    def expect_op(self, ch):
        tok = self.take()
        if tok[0] != "op" or tok[1] != ch:
            self.error(f"expected {ch!r}", tok)

    # -- grammar ------------------------------------------------------------
    def parse(self):
        value = self.expr()
        if self.peek()[0] != "end":
            self.error("unexpected token")
        return value

    def expr(self):
        value = self.term()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                value = self._add(value, rhs if tok[1] == "+" else _neg(rhs), tok)
            else:
                return value

    def term(self):
        value = self.factor()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "*/":
                self.take()
                rhs = self.factor()
                value = self._mul(value, rhs, tok) if tok[1] == "*" else self._div(value, rhs, tok)
            else:
                return value

    def factor(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            value = self.factor()
            return _neg(value) if tok[1] == "-" else value
        value = self.base()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            sign = 1
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "-":
                self.take()
                sign = -1
            exp = self.take()
            if exp[0] != "num":
                self.error("expected an integer exponent", exp)
            if isinstance(value, DiffForm):
                self.error("cannot raise a form to a power", tok)
            try:
                value = value ** (sign * exp[1])
            except ZeroDivisionError:
                raise ParseError("division by the zero polynomial", tok[2], self.text)
        return value

    def base(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return RatFunc.constant(self.chart, val)
        if kind == "ident":
            if val not in self.chart.names:
                raise ParseError(f"unknown variable {val!r}", tok[2], self.text)
            return self.chart.symbol(val)
        if kind == "form":
            return DiffForm.basis(self.chart, val)
        if kind == "op" and val == "(":
            value = self.expr()
            self.expect_op(")")
            return value
        self.error("expected a number, variable or '('", tok)

    # -- typed operations ------------------------------------------------------
    def _add(self, a, b, tok):
        if isinstance(a, DiffForm) or isinstance(b, DiffForm):
            a, b = _form(a), _form(b)
            if a.degree != b.degree:
                raise ParseError(f"cannot add forms of degree {a.degree} and {b.degree}",
                                 tok[2], self.text)
        return a + b

    def _mul(self, a, b, tok):
        if isinstance(a, DiffForm) or isinstance(b, DiffForm):
            return wedge(_form(a), _form(b))
        return a * b

    def _div(self, a, b, tok):
        if isinstance(b, DiffForm):
            if b.degree != 0:
                raise ParseError("cannot divide by a form", tok[2], self.text)
            b = b.as_function()
        if b.is_zero():
            raise ParseError("division by the zero polynomial", tok[2], self.text)
        if isinstance(a, DiffForm):
            return a.scale(b.inverse())
        return a / b


def _neg(x):
    return -x


def _form(x):
    return DiffForm.function(x) if isinstance(x, RatFunc) else x


def parse_expr(text, chart):
    """Parse a rational expression in ``chart``'s variables."""
    value = _Parser(text, chart, forms=False).parse()
    return value


def parse_form(text, chart, degree=None):
    """Parse a form expression such as ``x1*dx2^dx3 - 1/2*dx1^dx2^dx3``.

    A bare ``0`` (or any 0-form that is zero) is accepted as the zero form of
    the requested degree.
    """
    value = _Parser(text, chart, forms=True).parse()
    if isinstance(value, RatFunc):
        if degree not in (None, 0) and value.is_zero():
            return DiffForm.zero(chart, degree)
        value = DiffForm.function(value)
    if degree is not None and value.degree != degree:
        if value.is_zero():
            return DiffForm.zero(chart, degree)
        raise ParseError(f"expected a {degree}-form, got a {value.degree}-form", 0, text)
    return value
