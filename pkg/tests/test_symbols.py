from __future__ import annotations

import math
from fractions import Fraction

import pytest

from src.liftcoc.errors import ConfigError
from src.liftcoc.symbols import (
    AdInner,
    AdLnD,
    AdLnX,
    Monomial,
    PsiSymbol,
    TruncationPolicy,
    alternation_defect,
    apply_derivation,
    bracket,
    commutator_defect,
    derivation_basis,
    format_symbol,
    permutation_sign,
    product,
    q_between,
    q_series,
    random_symbol,
    residue,
    stability_check,
)


def sym(terms: dict, depth: int = 8) -> PsiSymbol:
    return PsiSymbol({Monomial((a,), (b,)): c for (a, b), c in terms.items()}, 1, depth)


# ── Product ──────────────────────────────────────────────────────────────


def test_canonical_commutation(x, d):
    assert d * x == sym({(1, 1): 1, (0, 0): 1})
    assert bracket(d, x) == PsiSymbol.one(1, 8)


def test_inverse_derivative_times_x(x):
    d_inv = PsiSymbol.d(1, 1, 8, power=-1)
    assert d_inv * x == sym({(1, -1): 1, (0, -2): -1})


def test_inverse_cancels(x, d):
    left = sym({(-1, -1): 1}, depth=6)
    assert product(left, d.with_depth(6) * x.with_depth(6)) == PsiSymbol.one(1, 6)


def test_unit_law(x, d):
    a = x + d
    assert a * PsiSymbol.one(1, 8) == a
    assert PsiSymbol.one(1, 8) * a == a


def test_bracket_examples(x, d):
    assert bracket(x * d, x) == x
    a = x * x + d.scale(3)
    assert bracket(a, a).is_zero()


def test_truncation_drops_deep_terms():
    a = sym({(-3, 0): 1, (0, -1): 2}, depth=2)
    assert a == sym({(0, -1): 2})
    assert a.with_depth(0).is_zero()


def test_scalar_multiplication_and_power(x):
    assert (x * 3) == x.scale(3) == 3 * x
    assert x**3 == PsiSymbol.x(1, 1, 8, power=3)
    with pytest.raises(ValueError):
        x ** -1


def test_mismatched_variable_counts():
    with pytest.raises(ValueError):
        PsiSymbol.x(1, 1, 8) + PsiSymbol.x(1, 2, 8)


@pytest.mark.parametrize("n", [1, 2])
def test_product_is_associative(rng, n):
    # factors have exponents <= 2, so terms lost at depth 12 stay below -6
    for _ in range(10):
        a, b, c = (random_symbol(rng, n, 2, 12, min_exponent=-3) for _ in range(3))
        assert ((a * b) * c).with_depth(6) == (a * (b * c)).with_depth(6)


def test_format_symbol():
    a = sym({(2, 1): 1, (1, 0): -3, (0, 0): Fraction(1, 2)})
    assert format_symbol(a) == "x1^2*d1 - 3*x1 + 1/2"
    assert format_symbol(-a) == "-x1^2*d1 + 3*x1 - 1/2"
    assert format_symbol(PsiSymbol.zero(1, 8)) == "0"


# ── Residue ──────────────────────────────────────────────────────────────


def test_residue_examples(x, d):
    assert residue(sym({(-1, -1): 1})) == 1
    assert residue(x * x * d) == 0


@pytest.mark.parametrize(
    "left,right",
    [
        ({(-1, 0): 1}, {(0, -1): 1}),
        ({(-1, 0): 1}, {(0, 1): 1}),
        ({(2, -3): 1}, {(-2, 1): 1}),
        ({(1, -2): 2, (0, -1): 1}, {(-1, 2): 1, (-3, 0): -1}),
    ],
)
def test_residue_vanishes_on_brackets(left, right):
    assert residue(bracket(sym(left), sym(right))) == 0


def test_residue_of_random_brackets(rng):
    for _ in range(20):
        a = random_symbol(rng, 2, 3, 8)
        b = random_symbol(rng, 2, 3, 8)
        assert residue(bracket(a, b)) == 0


def test_residue_of_brackets_with_poles(rng):
    nonzero_products = 0
    for _ in range(50):
        a = random_symbol(rng, 1, 2, 8, min_exponent=-6)
        b = random_symbol(rng, 1, 2, 8, min_exponent=-6)
        assert residue(bracket(a, b)) == 0
        nonzero_products += residue(a * b) != 0
    assert nonzero_products > 0


@pytest.mark.parametrize("n", [1, 2])
def test_residue_of_log_derivatives_with_poles(rng, n):
    for _ in range(20):
        a = random_symbol(rng, n, 2, 8, min_exponent=-6)
        for derivation in derivation_basis(n):
            assert residue(apply_derivation(derivation, a)) == 0


def test_random_symbol_with_poles_stays_in_range(rng):
    for _ in range(20):
        a = random_symbol(rng, 2, 2, 8, min_exponent=-6)
        assert -6 <= a.min_exponent() and a.max_exponent() <= 2


# ── Derivations ──────────────────────────────────────────────────────────


def test_log_d_examples(x, d):
    assert apply_derivation(AdLnD(1), d**3).is_zero()
    assert apply_derivation(AdLnD(1), x) == sym({(0, -1): 1})
    assert apply_derivation(AdLnD(1), x * x) == sym({(1, -1): 2, (0, -2): -1})


def test_log_x_examples(x, d):
    assert apply_derivation(AdLnX(1), x**2).is_zero()
    assert apply_derivation(AdLnX(1), d) == sym({(-1, 0): -1})


@pytest.mark.parametrize("n", [1, 2])
def test_log_derivations_obey_leibniz(rng, n):
    for _ in range(5):
        a, b = (random_symbol(rng, n, 2, 12, min_exponent=-3) for _ in range(2))
        for derivation in derivation_basis(n):
            lhs = apply_derivation(derivation, a * b)
            rhs = apply_derivation(derivation, a) * b + a * apply_derivation(derivation, b)
            assert lhs.with_depth(6) == rhs.with_depth(6)


def test_inner_derivation_is_bracket(x, d):
    assert apply_derivation(AdInner(x), d) == bracket(x, d)


def test_derivation_needs_matching_variable(x):
    with pytest.raises(ValueError):
        apply_derivation(AdLnD(2), x)


def test_derivation_basis_order():
    assert [str(D) for D in derivation_basis(2)] == [
        "ad ln x1",
        "ad ln x2",
        "ad ln d1",
        "ad ln d2",
    ]


# ── Q series ─────────────────────────────────────────────────────────────


def test_q_series_at_depth_four():
    q = q_between(AdLnD(1), AdLnX(1), 1, TruncationPolicy(4))
    assert q == sym(
        {
            (-1, -1): 1,
            (-2, -2): Fraction(1, 2),
            (-3, -3): Fraction(2, 3),
            (-4, -4): Fraction(3, 2),
        },
        depth=4,
    )
    assert q_between(AdLnX(1), AdLnD(1), 1, TruncationPolicy(4)) == -q


def test_q_vanishes_across_variables(policy):
    assert q_between(AdLnX(1), AdLnX(2), 2, policy).is_zero()
    assert q_between(AdLnD(1), AdLnX(2), 2, policy).is_zero()
    # positions 3 and 1 are ln d1 and ln x1
    assert q_series(3, 1, 2, policy) == q_between(AdLnD(1), AdLnX(1), 2, policy)


@pytest.mark.parametrize("depth", [4, 8])
def test_commutator_equals_inner_q_on_x_cubed(depth):
    a = PsiSymbol.x(1, 1, depth, power=3)
    assert commutator_defect(AdLnD(1), AdLnX(1), a, TruncationPolicy(depth)).is_zero()


def test_commutator_on_random_symbols(rng, policy):
    for _ in range(10):
        a = random_symbol(rng, 1, 3, policy.depth)
        assert commutator_defect(AdLnD(1), AdLnX(1), a, policy).is_zero()
        assert commutator_defect(AdLnX(1), AdLnD(1), a, policy).is_zero()


def test_commutator_of_x_matches_closed_form(x, policy):
    q = q_between(AdLnD(1), AdLnX(1), 1, policy)
    expected = PsiSymbol.zero(1, 8)
    for m in range(1, policy.depth):
        expected = expected - sym({(-m, -m - 1): math.factorial(m - 1)})
    assert bracket(q, x) == expected


def test_alternation_of_log_derivations(policy):
    basis = derivation_basis(2)
    for i, j, l in [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)]:
        assert alternation_defect(basis, i, j, l, 2, policy).is_zero()


def test_permutation_sign():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([2, 0, 1]) == 1


# ── Stability ────────────────────────────────────────────────────────────


def test_stable_residue_of_q_product():
    def value(depth: int) -> Fraction:
        q = q_between(AdLnD(1), AdLnX(1), 1, TruncationPolicy(depth))
        return residue(q * PsiSymbol.d(1, 1, depth) * PsiSymbol.x(1, 1, depth))

    result = stability_check(value, TruncationPolicy(4))
    assert result.stable
    assert result.value == Fraction(1, 2)
    assert result.depths == (4, 6)


def test_polynomials_are_depth_independent(rng):
    a = random_symbol(rng, 1, 3, 8)
    b = random_symbol(rng, 1, 3, 8)
    result = stability_check(
        lambda depth: residue(a.with_depth(depth) * b.with_depth(depth)), TruncationPolicy(3)
    )
    assert result.stable


def test_under_truncated_series_is_unstable(caplog):
    def value(depth: int) -> Fraction:
        a = PsiSymbol.monomial((-3,), (-1,), depth=depth)
        return residue(a * PsiSymbol.x(1, 1, depth, power=2))

    result = stability_check(value, TruncationPolicy(1))
    assert not result.stable
    assert (result.value, result.bumped_value) == (0, 1)
    assert "value moved" in caplog.text


def test_policy_validation():
    with pytest.raises(ConfigError):
        TruncationPolicy(0)
    assert TruncationPolicy(8).bumped() == TruncationPolicy(10)
