"""Shared fixtures for the liftcoc test suite."""

from __future__ import annotations

import random

import pytest

from src.liftcoc.matrices import AugmentedOp
from src.liftcoc.symbols import PsiSymbol, TruncationPolicy

DEPTH = 8


@pytest.fixture
def rng() -> random.Random:
    return random.Random(7)


@pytest.fixture
def policy() -> TruncationPolicy:
    return TruncationPolicy(DEPTH)


@pytest.fixture
def x() -> PsiSymbol:
    return PsiSymbol.x(1, 1, DEPTH)


@pytest.fixture
def d() -> PsiSymbol:
    return PsiSymbol.d(1, 1, DEPTH)


@pytest.fixture
def base_args(x, d) -> list[AugmentedOp]:
    """Id⊗∂, Id⊗x²∂, E_11⊗1."""
    return [
        AugmentedOp.identity(d),
        AugmentedOp.identity(x * x * d),
        AugmentedOp.elementary(1, 1, PsiSymbol.one(1, DEPTH)),
    ]
