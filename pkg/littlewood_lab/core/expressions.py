"""Numeric expressions accepted on the command line.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := ("+" | "-") factor | atom
    atom   := NUMBER | ("sqrt" | "cbrt") "(" expr ")" | "(" expr ")"

Rational results stay exact (``Fraction``); anything irrational is evaluated
once with mpmath at ``dps`` decimal digits (at least 80 bits) and is a fixed
real afterwards.
"""

from __future__ import annotations

import operator
import re
from fractions import Fraction
from typing import List, Tuple, Union

import mpmath
import sympy

from .errors import ContractError

Value = Union[Fraction, mpmath.mpf]

DEFAULT_DPS = 30

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]+)|(.))")
_FUNCTIONS = {"sqrt": 2, "cbrt": 3}
_OPERATORS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}


class ExpressionError(ContractError):
    """Raised for malformed or unsupported numeric expressions."""


def _tokenize(text: str) -> List[Tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ExpressionError(f"Cannot parse expression near {text[pos:]!r}")
        number, name, symbol = match.groups()
        if number is not None:
            tokens.append(("num", number))
        elif name is not None:
            tokens.append(("name", name.lower()))
        elif symbol is not None and not symbol.isspace():
            tokens.append(("sym", symbol))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str, dps: int) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.dps = dps

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def _take(self, kind=None, value=None):
        tok = self._peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ExpressionError(f"Unexpected token {tok[1]!r} in {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> Value:
        if not self.tokens:
            raise ExpressionError("Empty expression")
        result = self.expr()
        if self.pos != len(self.tokens):
            raise ExpressionError(f"Trailing input in {self.text!r}")
        return result

    def expr(self) -> Value:
        value = self.term()
        while self._peek() in (("sym", "+"), ("sym", "-")):
            op = self._take()[1]
            rhs = self.term()
            value = _combine(value, rhs, op)
        return value

    def term(self) -> Value:
        value = self.factor()
        while self._peek() in (("sym", "*"), ("sym", "/")):
            op = self._take()[1]
            rhs = self.factor()
            if op == "/" and rhs == 0:
                raise ExpressionError(f"Division by zero in {self.text!r}")
            value = _combine(value, rhs, op)
        return value

    def factor(self) -> Value:
        if self._peek() in (("sym", "-"), ("sym", "+")):
            op = self._take()[1]
            inner = self.factor()
            return -inner if op == "-" else inner
        return self.atom()

    def atom(self) -> Value:
        kind, token = self._peek()
        if kind == "num":
            self._take()
            return Fraction(token)
        if kind == "name":
            if token not in _FUNCTIONS:
                raise ExpressionError(f"Unknown function {token!r}; expected sqrt or cbrt")
            self._take()
            self._take("sym", "(")
            arg = self.expr()
            self._take("sym", ")")
            return _root(arg, _FUNCTIONS[token], self.dps)
        if (kind, token) == ("sym", "("):
            self._take()
            inner = self.expr()
            self._take("sym", ")")
            return inner
        raise ExpressionError(f"Unexpected token {token!r} in {self.text!r}")


def _combine(a: Value, b: Value, op: str) -> Value:
    if not (isinstance(a, Fraction) and isinstance(b, Fraction)):
        a, b = _to_mp(a), _to_mp(b)
    return _OPERATORS[op](a, b)


def _to_mp(value: Value) -> mpmath.mpf:
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def _root(value: Value, degree: int, dps: int) -> Value:
    if isinstance(value, Fraction):
        if degree == 2 and value < 0:
            raise ExpressionError("sqrt of a negative number")
        exact = sympy.root(sympy.Rational(value.numerator, value.denominator), degree)
        if degree == 3 and value < 0:
            exact = -sympy.root(sympy.Rational(-value.numerator, value.denominator), 3)
        if exact.is_Rational:
            return Fraction(int(exact.p), int(exact.q))
        return mpmath.mpf(sympy.N(exact, dps + 10))
    if degree == 2:
        if value < 0:
            raise ExpressionError("sqrt of a negative number")
        return mpmath.sqrt(value)
    return mpmath.cbrt(value)


def parse_expression(text: Union[str, int, float, Fraction], dps: int = DEFAULT_DPS) -> Value:
    """Parse ``sqrt(k)``, ``cbrt(k)``, ``p/q`` or decimal text into an exact or mp value."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text)
    with mpmath.workdps(max(dps, 25)):
        value = _Parser(str(text), max(dps, 25)).parse()
        if isinstance(value, mpmath.mpf):
            value = +value
    return value

