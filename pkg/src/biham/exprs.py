"""Parser for the shared expression grammar.

Grammar (whitespace insignificant):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'* power
    power  := atom ('^' '-'? INTEGER)?
    atom   := INTEGER | IDENTIFIER | '(' expr ')'

Identifiers are base coordinates; the jet surface syntax appends an order
suffix: ``u1_x``, ``u1_xx``, ``u1_xxx`` and ``u1_x4``, ``u1_x5``, ... from
order four on.  Integer powers must be nonnegative on anything containing a
jet variable; negative powers (and division) are permitted exactly where the
operand is jet-free, so the result is still a rational function coefficient.

Parsing returns a DiffPoly; use ``parse_ratfn`` when a plain coefficient is
expected.
"""

from __future__ import annotations

import re
from typing import Sequence

from .algebra import DivisionByZero, RatFn
from .jets import DiffPoly, JetError

_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[a-zA-Z][a-zA-Z0-9]*(?:_x\d+|_x{1,3})?)|(?P<op>[-+*/^()]))"
)


class ParseError(ValueError):
    """Syntax or lookup failure while parsing an expression."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.position = position


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError("unexpected character", text, pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


def _split_jet(name: str) -> tuple[str, int]:
    """Split a surface name into (base, order); order 0 for base coordinates."""
    head, sep, tail = name.rpartition("_")
    if not sep:
        return name, 0
    if re.fullmatch(r"x{1,3}", tail):
        return head, len(tail)
    if re.fullmatch(r"x\d+", tail):
        order = int(tail[1:])
        if order < 4:
            raise ValueError(f"orders below 4 use the repeated-x form, got {name!r}")
        return head, order
    return name, 0  # underscore belongs to the identifier itself


class _Parser:
    def __init__(self, text: str, coords: Sequence[str]):
        self.text = text
        self.coords = tuple(coords)
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def _next(self):
        tok = self._peek()
        self.i += 1
        return tok

    def _expect_op(self, op: str) -> None:
        kind, value, pos = self._next()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", self.text, pos)

    def parse(self) -> DiffPoly:
        value = self._expr()
        kind, _, pos = self._peek()
        if kind is not None:
            raise ParseError("trailing input", self.text, pos)
        return value

    def _expr(self) -> DiffPoly:
        value = self._term()
        while True:
            kind, op, _ = self._peek()
            if kind == "op" and op in "+-":
                self.i += 1
                rhs = self._term()
                value = value + rhs if op == "+" else value - rhs
            else:
                return value

    def _term(self) -> DiffPoly:
        value = self._factor()
        while True:
            kind, op, pos = self._peek()
            if kind == "op" and op in "*/":
                self.i += 1
                rhs = self._factor()
                if op == "*":
                    value = value * rhs
                else:
                    value = self._divide(value, rhs, pos)
            else:
                return value

    def _divide(self, lhs: DiffPoly, rhs: DiffPoly, pos: int) -> DiffPoly:
        if rhs.jet_order() > 0:
            raise ParseError("division by a jet-dependent expression", self.text, pos)
        den = rhs.as_ratfn()
        if den.is_zero:
            raise ParseError("division by zero", self.text, pos)
        return lhs * den.inverse()

    def _factor(self) -> DiffPoly:
        negate = False
        while True:
            kind, op, _ = self._peek()
            if kind == "op" and op in "+-":
                self.i += 1
                if op == "-":
                    negate = not negate
            else:
                break
        value = self._power()
        return -value if negate else value

    def _power(self) -> DiffPoly:
        base = self._atom()
        kind, op, pos = self._peek()
        if kind == "op" and op == "^":
            self.i += 1
            exponent = self._exponent()
            if exponent >= 0:
                return base ** exponent
            if base.jet_order() > 0:
                raise ParseError(
                    "negative power of a jet-dependent expression", self.text, pos)
            f = base.as_ratfn()
            if f.is_zero:
                raise ParseError("negative power of zero", self.text, pos)
            return DiffPoly.from_ratfn(f ** exponent)
        return base

    def _exponent(self) -> int:
        sign = 1
        kind, value, pos = self._next()
        if kind == "op" and value == "-":
            sign = -1
            kind, value, pos = self._next()
        if kind != "int":
            raise ParseError("expected integer exponent", self.text, pos)
        return sign * int(value)

    def _atom(self) -> DiffPoly:
        kind, value, pos = self._next()
        if kind == "int":
            return DiffPoly.constant(self.coords, int(value))
        if kind == "ident":
            return self._resolve(value, pos)
        if kind == "op" and value == "(":
            inner = self._expr()
            self._expect_op(")")
            return inner
        raise ParseError("expected a value", self.text, pos)

    def _resolve(self, name: str, pos: int) -> DiffPoly:
        try:
            base, order = _split_jet(name)
        except ValueError as exc:
            raise ParseError(str(exc), self.text, pos) from None
        if base not in self.coords:
            if name in self.coords:  # identifier that happens to contain _x
                base, order = name, 0
            else:
                raise ParseError(f"unknown coordinate {base!r}", self.text, pos)
        index = self.coords.index(base)
        if order == 0:
            return DiffPoly.base(self.coords, index)
        return DiffPoly.jet(self.coords, index, order)


def parse_expression(text: str, coords: Sequence[str]) -> DiffPoly:
    """Parse an expression over the given base coordinates into a DiffPoly."""
    try:
        return _Parser(text, coords).parse()
    except (DivisionByZero, JetError) as exc:
        raise ParseError(str(exc), text, 0) from exc


def parse_ratfn(text: str, coords: Sequence[str]) -> RatFn:
    """Parse a jet-free expression into a rational function coefficient."""
    value = parse_expression(text, coords)
    if value.jet_order() > 0:
        raise ParseError("expected a jet-free expression", text, 0)
    return value.as_ratfn()
