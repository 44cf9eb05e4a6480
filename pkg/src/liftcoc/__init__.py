"""Exact lifted cocycles on matrices over pseudodifferential symbols."""

from src.liftcoc.cocycles import CocycleSpec, psi, psi_stable
from src.liftcoc.matrices import AugmentedOp
from src.liftcoc.parser import format_operator, parse_operator
from src.liftcoc.symbols import PsiSymbol, TruncationPolicy

__all__ = [
    "AugmentedOp",
    "CocycleSpec",
    "PsiSymbol",
    "TruncationPolicy",
    "format_operator",
    "parse_operator",
    "psi",
    "psi_stable",
]
