from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pwa_entropy.geometry import Point

# Property suites run at least 200 cases each.
PROPERTY_EXAMPLES = 200
settings.register_profile(
    "default", max_examples=PROPERTY_EXAMPLES, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def rationals(lo=-2, hi=2, max_den=64):
    return st.fractions(min_value=Fraction(lo), max_value=Fraction(hi), max_denominator=max_den).map(
        lambda f: mpq(f.numerator, f.denominator))


def points(lo=-2, hi=2, max_den=64):
    return st.builds(Point, rationals(lo, hi, max_den), rationals(lo, hi, max_den))


def rhombus_interior(den=256):
    """Points strictly inside |x| + |y| < 1 and off both axes.

    a = odd/den and b = even/den give x = (a + b)/2 and y = (a - b)/2 with
    odd numerators, and |x| + |y| = max(|a|, |b|) < 1.
    """
    odd = st.integers(-den // 2, den // 2 - 1).map(lambda k: 2 * k + 1)
    even = st.integers(-den // 2 + 1, den // 2 - 1).map(lambda k: 2 * k)
    return st.builds(lambda i, j: Point(mpq(i + j, 2 * den), mpq(i - j, 2 * den)), odd, even)


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and (report.when == "call" or report.failed):
        _ACCEPTANCE[report.nodeid.split("::", 1)[1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def half():
    return mpq(1, 2)
