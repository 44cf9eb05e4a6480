from __future__ import annotations

import pytest

from src.liftcoc.errors import NonTraceClass
from src.liftcoc.matrices import (
    AugmentedOp,
    FinMatrix,
    alt_trace,
    aug_bracket,
    aug_derivation,
    aug_product,
    aug_trace,
    random_augmented,
    scalar_trace,
)
from src.liftcoc.symbols import AdLnD, PsiSymbol, derivation_basis


@pytest.fixture
def one() -> PsiSymbol:
    return PsiSymbol.one(1, 8)


def test_elementary_idempotent(one):
    e11 = AugmentedOp.elementary(1, 1, one)
    assert e11 * e11 == e11
    assert AugmentedOp.elementary(1, 2, one) * AugmentedOp.elementary(1, 2, one) == (
        AugmentedOp.zero(1, 8)
    )


def test_identity_acts_entrywise(x, d):
    product = AugmentedOp.identity(d) * AugmentedOp.elementary(1, 1, x)
    assert product == AugmentedOp.elementary(1, 1, x * d + PsiSymbol.one(1, 8))
    assert product.is_finite()


def test_identity_parts_multiply(x, d):
    product = aug_product(AugmentedOp.identity(x), AugmentedOp.identity(d))
    assert product == AugmentedOp.identity(x * d)
    assert not product.is_finite()


def test_right_identity_factor(x, d):
    product = AugmentedOp.elementary(1, 2, x) * AugmentedOp.identity(d)
    assert product == AugmentedOp.elementary(1, 2, x * d)


def test_trace_examples(x):
    res = PsiSymbol.monomial((-1,), (-1,), depth=8)
    assert aug_trace(AugmentedOp.elementary(1, 1, res)) == 1
    assert aug_trace(AugmentedOp.elementary(1, 2, res + x)) == 0
    with pytest.raises(NonTraceClass):
        aug_trace(AugmentedOp.identity(res))


def test_trace_ignores_identity_without_residue(x, d):
    op = AugmentedOp.identity(x * d) + AugmentedOp.elementary(
        2, 2, PsiSymbol.monomial((-1,), (-1,), coeff=3, depth=8)
    )
    assert aug_trace(op) == 3


def test_derivation_entrywise(x, d):
    assert aug_derivation(AdLnD(1), AugmentedOp.identity(x)) == AugmentedOp.identity(
        PsiSymbol.d(1, 1, 8, power=-1)
    )
    assert aug_derivation(AdLnD(1), AugmentedOp.elementary(1, 1, d**3)).is_zero()


def test_bracket_of_elementary_matrices(one):
    e, f = AugmentedOp.elementary(1, 2, one), AugmentedOp.elementary(2, 1, one)
    h = AugmentedOp.elementary(1, 1, one) - AugmentedOp.elementary(2, 2, one)
    assert aug_bracket(e, f) == h
    assert aug_bracket(h, e) == e.scale(2)


def test_alt_trace_of_sl2_triple(one):
    e, f = AugmentedOp.elementary(1, 2, one), AugmentedOp.elementary(2, 1, one)
    h = AugmentedOp.elementary(1, 1, one) - AugmentedOp.elementary(2, 2, one)
    assert alt_trace([e, f, h], scalar_trace) == 6
    assert alt_trace([f, e, h], scalar_trace) == -6
    # constants have no residue
    assert alt_trace([e, f, h]) == 0


def test_scalar_trace_rejects_constant_identity(one):
    with pytest.raises(NonTraceClass):
        scalar_trace(AugmentedOp.identity(one))


def test_alt_trace_with_residue_entries(one):
    res = PsiSymbol.monomial((-1,), (-1,), depth=8)
    a = AugmentedOp.elementary(1, 2, one)
    b = AugmentedOp.elementary(2, 1, res)
    # Tr(ab) - Tr(ba) = res(E11 ⊗ res) - res(E22 ⊗ res)
    assert alt_trace([a, b]) == 0
    assert aug_trace(a * b) == 1


def test_random_operator_is_finite_and_nonzero(rng):
    for _ in range(10):
        op = random_augmented(rng, 1, 2, 2, 8)
        assert op.is_finite()
        assert not op.is_zero()
        assert op.window() <= 2


def test_matrix_indices_start_at_one(one):
    with pytest.raises(ValueError):
        FinMatrix({(0, 1): one}, 1, 8)


def test_with_depth_retags_entries(x):
    op = AugmentedOp.elementary(1, 1, x.with_depth(3)).with_depth(5)
    assert op.depth == 5
    assert all(entry.depth == 5 for _, entry in op.finite.items())


def test_exponent_range(x, d):
    op = AugmentedOp.identity(x * x * d) + AugmentedOp.elementary(
        1, 2, PsiSymbol.monomial((-3,), (-1,), depth=8)
    )
    assert op.max_exponent() == 2
    assert op.min_exponent() == -3


@pytest.mark.parametrize("n", [1, 2])
def test_traces_of_brackets_and_derivations_vanish(rng, n):
    for _ in range(10):
        a, b = (
            random_augmented(rng, n, 2, 2, 8, with_identity=True, min_exponent=-4)
            for _ in range(2)
        )
        assert aug_trace(aug_bracket(a, b)) == 0
        for derivation in derivation_basis(n):
            assert aug_trace(aug_derivation(derivation, a)) == 0
