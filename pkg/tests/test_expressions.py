from fractions import Fraction

import mpmath
import pytest

from littlewood_lab.core.expressions import ExpressionError, parse_expression


@pytest.mark.parametrize(
    "text, expected",
    [
        ("1/3", Fraction(1, 3)),
        ("0.25", Fraction(1, 4)),
        ("-(2 + 3) * 4", Fraction(-20)),
        ("sqrt(9/4)", Fraction(3, 2)),
        ("cbrt(-8)", Fraction(-2)),
        ("1e-3", Fraction(1, 1000)),
    ],
)
def test_rational_results_stay_exact(text, expected):
    value = parse_expression(text)
    assert isinstance(value, Fraction)
    assert value == expected


def test_irrational_root_is_high_precision():
    value = parse_expression("cbrt(2)")
    assert isinstance(value, mpmath.mpf)
    with mpmath.workdps(30):
        assert abs(value ** 3 - 2) < mpmath.mpf(10) ** -25


def test_mixed_arithmetic():
    value = parse_expression("sqrt(2) - 1")
    assert float(value) == pytest.approx(2 ** 0.5 - 1, abs=1e-15)


def test_passthrough_numbers():
    assert parse_expression(3) == Fraction(3)
    assert parse_expression(Fraction(2, 5)) == Fraction(2, 5)
    assert parse_expression(0.5) == Fraction(1, 2)


@pytest.mark.parametrize("text", ["", "1/0", "sqrt(-1)", "log(2)", "(1 + 2", "1 2"])
def test_rejects_bad_input(text):
    with pytest.raises(ExpressionError):
        parse_expression(text)
