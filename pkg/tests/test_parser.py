from __future__ import annotations

import random
from fractions import Fraction

import pytest

from src.liftcoc.errors import IndexOutOfRange, ParseError
from src.liftcoc.matrices import AugmentedOp
from src.liftcoc.parser import (
    format_operator,
    parse_operator,
    parse_symbol,
    split_arguments,
    tokenize,
)
from src.liftcoc.symbols import Monomial, PsiSymbol


def test_elementary_unit():
    assert parse_operator("E[1,1]*(1)") == AugmentedOp.elementary(1, 1, PsiSymbol.one(1, 8))


def test_identity_symbol(x, d):
    expected = AugmentedOp.identity(x * x * d - x.scale(3))
    assert parse_operator("ID*(x1^2*d1 - 3*x1)") == expected
    assert parse_operator("x1^2*d1 - 3*x1") == expected


def test_lowering_normal_orders(x, d):
    assert parse_operator("d1*x1") == AugmentedOp.identity(x * d + PsiSymbol.one(1, 8))


def test_rationals_and_negative_powers():
    op = parse_operator("-3/2*x1^-2*d1 + 1/2")
    expected = PsiSymbol.from_terms([((-2,), (1,), Fraction(-3, 2)), ((0,), (0,), Fraction(1, 2))], 1, 8)
    assert op == AugmentedOp.identity(expected)


def test_matrix_expression():
    op = parse_operator("E[1,2]*x1 + E[2,1]*d1 - 2*E[1,1]")
    assert op.finite.get(1, 2) == PsiSymbol.x(1, 1, 8)
    assert op.finite.get(2, 1) == PsiSymbol.d(1, 1, 8)
    assert op.finite.get(1, 1) == PsiSymbol.one(1, 8).scale(-2)
    assert op.is_finite()


def test_powers_of_matrix_units():
    assert parse_operator("E[1,2]^2").is_zero()
    assert parse_operator("E[1,1]^0") == AugmentedOp.identity(PsiSymbol.one(1, 8))


def test_several_variables():
    op = parse_symbol("x1*x2^2*d2^-1", n=2)
    assert op == PsiSymbol({Monomial((1, 2), (0, -1)): 1}, 2, 8)


def test_parse_symbol_rejects_matrix_units():
    with pytest.raises(ParseError):
        parse_symbol("E[1,1]*x1")


def test_split_arguments():
    assert split_arguments("d1, x1^2*d1, E[1,1]") == ["d1", "x1^2*d1", "E[1,1]"]
    assert split_arguments("E[1,2]*(x1 + 1), ID") == ["E[1,2]*(x1 + 1)", "ID"]


def test_tokenize_positions():
    tokens = tokenize("x1 + d1")
    assert [(t.kind, t.pos) for t in tokens] == [
        ("var", 0),
        ("op", 3),
        ("var", 5),
        ("end", 7),
    ]


@pytest.mark.parametrize(
    "text,n,position",
    [
        ("x1 +", 1, 4),
        ("x1 $ d1", 1, 3),
        ("1/0", 1, 2),
        ("E[0,1]", 1, 2),
        ("E[1,1]^-1", 1, 0),
        ("(x1", 1, 3),
        ("x1 d1", 1, 3),
    ],
)
def test_parse_errors(text, n, position):
    with pytest.raises(ParseError) as info:
        parse_operator(text, n)
    assert info.value.position == position
    assert f"position {position}" in str(info.value)


def test_variable_index_out_of_range():
    with pytest.raises(IndexOutOfRange) as info:
        parse_operator("x1*x3", n=2)
    assert info.value.position == 4


# ── Round trip ───────────────────────────────────────────────────────────


def random_symbol_with_poles(rng: random.Random, n: int, depth: int) -> PsiSymbol:
    terms = []
    for _ in range(rng.randint(0, 3)):
        x = tuple(rng.randint(-depth, 3) for _ in range(n))
        d = tuple(rng.randint(-depth, 3) for _ in range(n))
        terms.append((x, d, Fraction(rng.randint(-5, 5), rng.randint(1, 4))))
    return PsiSymbol.from_terms(terms, n, depth)


def random_operator(rng: random.Random) -> AugmentedOp:
    n = rng.randint(1, 2)
    depth = 4
    op = AugmentedOp.zero(n, depth)
    for _ in range(rng.randint(0, 3)):
        i, j = rng.randint(1, 3), rng.randint(1, 3)
        op = op + AugmentedOp.elementary(i, j, random_symbol_with_poles(rng, n, depth))
    if rng.random() < 0.5:
        op = op + AugmentedOp.identity(random_symbol_with_poles(rng, n, depth))
    return op


def test_round_trip_fuzz():
    rng = random.Random(1234)
    for _ in range(1000):
        op = random_operator(rng)
        text = format_operator(op)
        assert parse_operator(text, op.n, op.depth) == op, text


def test_format_examples(x, d):
    assert format_operator(AugmentedOp.zero(1, 8)) == "0"
    op = AugmentedOp.identity(x * d) + AugmentedOp.elementary(2, 1, d.scale(-1))
    assert format_operator(op) == "ID*(x1*d1) + E[2,1]*(-d1)"
    assert str(op) == format_operator(op)
