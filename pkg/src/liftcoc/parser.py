"""
Text form of augmented operators.

    expr   := term (('+' | '-') term)*        leading '-' allowed
    term   := factor ('*' factor)*
    factor := rational | atom ('^' signedInt)? | '(' expr ')'
    atom   := 'x'IDX | 'd'IDX | 'E' '[' IDX ',' IDX ']' | 'ID'

Plain symbols stand for Id ⊗ symbol.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import NamedTuple

from src.liftcoc.config import DEFAULT_DEPTH
from src.liftcoc.errors import IndexOutOfRange, ParseError
from src.liftcoc.matrices import AugmentedOp, aug_product
from src.liftcoc.symbols import PsiSymbol, format_symbol

_TOKEN_RE = re.compile(
    r"(?P<number>\d+)|(?P<var>[xd]\d+)|(?P<ident>ID)|(?P<unit>E)|(?P<op>[-+*^/(),\[\]])"
)


class Token(NamedTuple):
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        tokens.append(Token(match.lastgroup, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int, depth: int):
        self.tokens = tokenize(text)
        self.i = 0
        self.n = n
        self.depth = depth

    # ── cursor ──

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        token = self.tokens[self.i]
        self.i += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text:
            shown = token.text or "end of input"
            raise ParseError(f"expected {text!r}, found {shown!r}", token.pos)
        return self.advance()

    def integer(self) -> tuple[int, int]:
        token = self.current
        if token.kind != "number":
            raise ParseError("expected an integer", token.pos)
        self.advance()
        return int(token.text), token.pos

    # ── grammar ──

    def parse(self) -> AugmentedOp:
        value = self.expr()
        if self.current.kind != "end":
            raise ParseError(f"unexpected {self.current.text!r}", self.current.pos)
        return value

    def expr(self) -> AugmentedOp:
        negate = False
        if self.current.text == "-":
            self.advance()
            negate = True
        value = self.term()
        if negate:
            value = -value
        while self.current.text in ("+", "-"):
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> AugmentedOp:
        value = self.factor()
        while self.current.text == "*":
            self.advance()
            value = aug_product(value, self.factor())
        return value

    def factor(self) -> AugmentedOp:
        token = self.current
        if token.kind == "number":
            return AugmentedOp.identity(PsiSymbol.one(self.n, self.depth).scale(self.rational()))
        if token.text == "(":
            self.advance()
            value = self.expr()
            self.expect(")")
            return value
        if token.kind == "var":
            self.advance()
            index = self.variable_index(token)
            power = self.exponent()
            make = PsiSymbol.x if token.text[0] == "x" else PsiSymbol.d
            return AugmentedOp.identity(make(index, self.n, self.depth, power))
        if token.kind in ("ident", "unit"):
            base = self.matrix_atom()
            power = self.exponent()
            if power < 0:
                raise ParseError("negative powers are defined for x and d only", token.pos)
            value = AugmentedOp.identity(PsiSymbol.one(self.n, self.depth))
            for _ in range(power):
                value = aug_product(value, base)
            return value
        shown = token.text or "end of input"
        raise ParseError(f"unexpected {shown!r}", token.pos)

    def rational(self) -> Fraction:
        numerator, _ = self.integer()
        if self.current.text == "/":
            self.advance()
            denominator, pos = self.integer()
            if denominator == 0:
                raise ParseError("zero denominator", pos)
            return Fraction(numerator, denominator)
        return Fraction(numerator)

    def exponent(self) -> int:
        if self.current.text != "^":
            return 1
        self.advance()
        sign = 1
        if self.current.text in ("-", "+"):
            sign = -1 if self.advance().text == "-" else 1
        value, _ = self.integer()
        return sign * value

    def variable_index(self, token: Token) -> int:
        index = int(token.text[1:])
        if not 1 <= index <= self.n:
            raise IndexOutOfRange(
                f"variable {token.text} outside 1..{self.n}", token.pos + 1
            )
        return index

    def matrix_atom(self) -> AugmentedOp:
        token = self.advance()
        one = PsiSymbol.one(self.n, self.depth)
        if token.kind == "ident":
            return AugmentedOp.identity(one)
        self.expect("[")
        row, row_pos = self.integer()
        self.expect(",")
        col, col_pos = self.integer()
        self.expect("]")
        if row < 1:
            raise ParseError("matrix indices start at 1", row_pos)
        if col < 1:
            raise ParseError("matrix indices start at 1", col_pos)
        return AugmentedOp.elementary(row, col, one)


def parse_operator(text: str, n: int = 1, depth: int = DEFAULT_DEPTH) -> AugmentedOp:
    return _Parser(text, n, depth).parse()


def parse_symbol(text: str, n: int = 1, depth: int = DEFAULT_DEPTH) -> PsiSymbol:
    """Parse an expression that must not involve matrix units."""
    op = parse_operator(text, n, depth)
    if op.finite:
        raise ParseError("expected a plain symbol, found matrix units", 0)
    return op.id_part


def split_arguments(text: str) -> list[str]:
    """Split on commas outside brackets and parentheses."""
    parts, depth, start = [], 0, 0
    for pos, char in enumerate(text):
        if char in "([":
            depth += 1
        elif char in ")]":
            depth -= 1
        elif char == "," and depth == 0:
            parts.append(text[start:pos])
            start = pos + 1
    parts.append(text[start:])
    return [p.strip() for p in parts if p.strip()]


def format_operator(op: AugmentedOp) -> str:
    """Canonical text form; parse_operator(format_operator(a)) == a."""
    pieces = []
    if op.id_part:
        pieces.append(f"ID*({format_symbol(op.id_part)})")
    for (i, j), entry in sorted(op.finite.items()):
        pieces.append(f"E[{i},{j}]*({format_symbol(entry)})")
    return " + ".join(pieces) if pieces else "0"
