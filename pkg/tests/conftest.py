import pytest

from algebroids.symcalc import Chart, parse_expr, parse_form


@pytest.fixture
def R2():
    return Chart("R2", ("x1", "x2"))


@pytest.fixture
def R3():
    return Chart("R3", ("x1", "x2", "x3"))


def F(text, chart, degree=None):
    """Parse a form expression (test shorthand)."""
    return parse_form(text, chart, degree)


def E(text, chart):
    return parse_expr(text, chart)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance lines collected by test_acceptance.py."""
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
    missing = [n for n in range(1, 12) if n not in lines]
    if missing:
        terminalreporter.write_line(f"criteria not run: {missing}")
