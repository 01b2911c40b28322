"""Result records shared by the verification suites."""

from __future__ import annotations

from dataclasses import dataclass, field

MAX_RESIDUAL_CHARS = 400


def shorten(text, limit=MAX_RESIDUAL_CHARS):
    text = str(text)
    if len(text) <= limit:
        return text
    return text[:limit] + f"... [{len(text) - limit} more chars]"


@dataclass
class Check:
    """One identity instance: ``passed`` iff the residual normalized to zero."""

    name: str
    passed: bool
    residual: str = "0"
    witness: str = ""

    def to_dict(self):
        out = {"name": self.name, "passed": self.passed, "residual": self.residual}
        if self.witness:
            out["witness"] = self.witness
        return out


@dataclass
class Report:
    """An ordered collection of checks plus free-form data."""

    title: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, residual, witness=""):
        """Record a residual; anything with ``is_zero`` (or a bool) is accepted."""
        if isinstance(residual, bool):
            ok = residual
            text = "0" if ok else "nonzero"
        else:
            ok = residual_is_zero(residual)
            text = "0" if ok else shorten(residual_text(residual))
        self.checks.append(Check(name, ok, text, "" if ok else witness))
        return ok

    def get(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "data": self.data,
        }

    def __str__(self):
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            line = f"  [{mark}] {c.name}"
            if not c.passed:
                line += f"  residual={c.residual}"
                if c.witness:
                    line += f"  at {c.witness}"
            lines.append(line)
        return "\n".join(lines)


def residual_is_zero(value):
    if isinstance(value, (list, tuple)):
        return all(residual_is_zero(v) for v in value)
    if isinstance(value, (int,)):
        return value == 0
    return value.is_zero()


def residual_text(value):
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(residual_text(v) for v in value) + "]"
    return str(value)
