import pytest

from abel.core import ComplexPolynomial, make_equation


@pytest.fixture
def cubic_eq():
    """y' = y**3, solved by y = (y0**-2 - 2x)**-1/2."""
    return make_equation(ComplexPolynomial((0.0,)), ComplexPolynomial((1.0,)))


@pytest.fixture
def linear_q_eq():
    """y' = x y**3, solved by y = (y0**-2 - x**2)**-1/2."""
    return make_equation(ComplexPolynomial((0.0,)), ComplexPolynomial((0.0, 1.0)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
