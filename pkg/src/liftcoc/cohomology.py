"""
Chevalley–Eilenberg chains and cochains over gl_∞(ΨDif_n) with trivial
coefficients: coboundaries, contractions, chain boundary and exact cycle search.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import sympy

from src.liftcoc.config import DEFAULT_DEPTH, MAX_WEDGE_DIMENSION
from src.liftcoc.errors import ArityMismatch, DimensionTooLarge
from src.liftcoc.matrices import (
    AugmentedOp,
    alt_trace,
    aug_bracket,
    aug_product,
    aug_trace,
)
from src.liftcoc.symbols import Monomial, PsiSymbol, Scalar, format_monomial

logger = logging.getLogger(__name__)


# ── Chains ───────────────────────────────────────────────────────────────


class BasisKey(NamedTuple):
    """E_row,col ⊗ mono; row = col = 0 stands for Id ⊗ mono."""

    row: int
    col: int
    mono: Monomial

    def to_op(self, depth: int) -> AugmentedOp:
        symbol = PsiSymbol({self.mono: 1}, self.mono.n, depth)
        if self.row == 0:
            return AugmentedOp.identity(symbol)
        return AugmentedOp.elementary(self.row, self.col, symbol)

    def __str__(self) -> str:
        body = format_monomial(self.mono) or "1"
        head = "ID" if self.row == 0 else f"E[{self.row},{self.col}]"
        return f"{head}*({body})"


Word = tuple[BasisKey, ...]


def decompose(op: AugmentedOp) -> dict[BasisKey, Fraction]:
    coords: dict[BasisKey, Fraction] = {}
    for (i, j), entry in op.finite.items():
        for mono, coeff in entry.items():
            coords[BasisKey(i, j, mono)] = coeff
    for mono, coeff in op.id_part.items():
        coords[BasisKey(0, 0, mono)] = coeff
    return coords


def _normalize(word: Word) -> tuple[int, Word]:
    """Sort a wedge word; sign 0 when a key repeats."""
    if len(set(word)) < len(word):
        return 0, ()
    order = sorted(range(len(word)), key=lambda i: word[i])
    inversions = sum(
        1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b]
    )
    return (-1 if inversions % 2 else 1), tuple(word[i] for i in order)


class ChainElement:
    """Finite linear combination of sorted wedge words of basis keys."""

    __slots__ = ("_terms", "n", "depth")

    def __init__(self, terms: Mapping[Word, Scalar] | None, n: int, depth: int):
        acc: dict[Word, Fraction] = defaultdict(Fraction)
        for word, coeff in (terms or {}).items():
            sign, canonical = _normalize(tuple(word))
            if sign:
                acc[canonical] += sign * Fraction(coeff)
        self._terms = {w: c for w, c in acc.items() if c}
        self.n = n
        self.depth = depth

    @classmethod
    def zero(cls, n: int = 1, depth: int = DEFAULT_DEPTH) -> ChainElement:
        return cls({}, n, depth)

    def items(self):
        return self._terms.items()

    def words(self) -> list[Word]:
        return list(self._terms)

    @property
    def degree(self) -> int | None:
        degrees = {len(w) for w in self._terms}
        if len(degrees) > 1:
            raise ValueError(f"chain mixes degrees {sorted(degrees)}")
        return degrees.pop() if degrees else None

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def _combine(self, other: ChainElement, sign: int) -> ChainElement:
        acc = dict(self._terms)
        for word, coeff in other._terms.items():
            acc[word] = acc.get(word, Fraction(0)) + sign * coeff
        return ChainElement(acc, self.n, min(self.depth, other.depth))

    def __add__(self, other: ChainElement) -> ChainElement:
        return self._combine(other, 1)

    def __sub__(self, other: ChainElement) -> ChainElement:
        return self._combine(other, -1)

    def scale(self, factor: Scalar) -> ChainElement:
        return ChainElement(
            {w: c * factor for w, c in self._terms.items()}, self.n, self.depth
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChainElement):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "ChainElement(0)"
        parts = [
            f"{coeff}·" + "∧".join(str(k) for k in word) for word, coeff in self.items()
        ]
        return "ChainElement(" + " + ".join(parts) + ")"


def wedge(*ops: AugmentedOp) -> ChainElement:
    """g_1 ∧ … ∧ g_p expanded multilinearly over basis keys."""
    if not ops:
        raise ValueError("wedge needs at least one factor")
    n = ops[0].n
    depth = min(op.depth for op in ops)
    acc: dict[Word, Fraction] = defaultdict(Fraction)
    for choice in itertools.product(*(decompose(op).items() for op in ops)):
        word = tuple(key for key, _ in choice)
        acc[word] += math.prod((c for _, c in choice), start=Fraction(1))
    return ChainElement(acc, n, depth)


def word_ops(word: Word, depth: int) -> list[AugmentedOp]:
    return [key.to_op(depth) for key in word]


def chain_boundary(chain: ChainElement) -> ChainElement:
    """∂(g_1∧…∧g_p) = Σ_{i<j} (-1)^{i+j} [g_i, g_j] ∧ g_1 … ĝ_i … ĝ_j … g_p."""
    acc: dict[Word, Fraction] = defaultdict(Fraction)
    depth = chain.depth
    for word, coeff in chain.items():
        ops = word_ops(word, depth)
        for i, j in itertools.combinations(range(len(word)), 2):
            sign = -1 if (i + j) % 2 else 1
            rest = word[:i] + word[i + 1 : j] + word[j + 1 :]
            for key, c in decompose(aug_bracket(ops[i], ops[j])).items():
                acc[(key, *rest)] += sign * coeff * c
    return ChainElement(acc, chain.n, depth)


# ── Cochains ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class CochainHandle:
    arity: int
    evaluator: Callable[[Sequence[AugmentedOp]], Fraction]
    name: str = "c"

    def __call__(self, args: Sequence[AugmentedOp]) -> Fraction:
        args = list(args)
        if len(args) != self.arity:
            raise ArityMismatch(f"{self.name} takes {self.arity} arguments, got {len(args)}")
        return Fraction(self.evaluator(args))


def coboundary_eval(c: CochainHandle, args: Sequence[AugmentedOp]) -> Fraction:
    """(δc)(g_1..g_{p+1}) = Σ_{i<j} (-1)^{i+j} c([g_i,g_j], g_1 … ĝ_i … ĝ_j …)."""
    args = list(args)
    if len(args) != c.arity + 1:
        raise ArityMismatch(f"δ{c.name} takes {c.arity + 1} arguments, got {len(args)}")
    total = Fraction(0)
    for i, j in itertools.combinations(range(len(args)), 2):
        rest = args[:i] + args[i + 1 : j] + args[j + 1 :]
        value = c([aug_bracket(args[i], args[j]), *rest])
        total += -value if (i + j) % 2 else value
    return total


def coboundary(c: CochainHandle) -> CochainHandle:
    return CochainHandle(c.arity + 1, lambda args: coboundary_eval(c, args), f"δ{c.name}")


def contraction(c: CochainHandle, t: AugmentedOp) -> CochainHandle:
    """ι_t c: t substituted as the first argument."""
    if c.arity < 1:
        raise ArityMismatch(f"cannot contract the 0-cochain {c.name}")
    return CochainHandle(c.arity - 1, lambda args: c([t, *args]), f"ι{c.name}")


def ad_action(t: AugmentedOp, c: CochainHandle) -> CochainHandle:
    """(t·c)(g) = -Σ_i c(g_1 … [t, g_i] … g_p); equals δι_t c + ι_t δc."""

    def evaluate(args: Sequence[AugmentedOp]) -> Fraction:
        total = Fraction(0)
        for i in range(len(args)):
            moved = list(args)
            moved[i] = aug_bracket(t, args[i])
            total -= c(moved)
        return total

    return CochainHandle(c.arity, evaluate, f"ad·{c.name}")


def pair(c: CochainHandle, chain: ChainElement) -> Fraction:
    """⟨c, γ⟩ = Σ coeff · c(word)."""
    total = Fraction(0)
    for word, coeff in chain.items():
        total += coeff * c(word_ops(word, chain.depth))
    return total


def trace_cochain(p: int) -> CochainHandle:
    """g ↦ Tr Σ_σ sign σ g_σ(1) ⋯ g_σ(p); a cocycle for odd p."""
    return CochainHandle(p, alt_trace, f"tr{p}")


def bracket_trace_cochain(x: AugmentedOp) -> CochainHandle:
    """(g, h) ↦ Tr(x·[g, h]); an alternating 2-cochain for checks."""
    return CochainHandle(2, lambda args: aug_trace(aug_product(x, aug_bracket(*args))), "trx")


# ── Cycle search ─────────────────────────────────────────────────────────


def _coefficient_symbols(
    coefficient_basis: Iterable[PsiSymbol] | None, n: int, depth: int
) -> list[PsiSymbol]:
    if coefficient_basis is None:
        return [PsiSymbol.one(n, depth)]
    return list(coefficient_basis)


def find_cycles(
    window: int,
    degree: int,
    coefficient_basis: Iterable[PsiSymbol] | None = None,
    n: int = 1,
    depth: int = DEFAULT_DEPTH,
) -> list[ChainElement]:
    """Basis of ker ∂ on Λ^degree of span{E_ij ⊗ b : i, j <= window, b in basis}."""
    symbols = _coefficient_symbols(coefficient_basis, n, depth)
    generators = [
        AugmentedOp.elementary(i, j, b)
        for i in range(1, window + 1)
        for j in range(1, window + 1)
        for b in symbols
    ]
    columns = list(itertools.combinations(range(len(generators)), degree))
    if len(columns) > MAX_WEDGE_DIMENSION:
        raise DimensionTooLarge(
            f"Λ^{degree} has {len(columns)} basis words, cap is {MAX_WEDGE_DIMENSION}"
        )
    logger.info("cycle search: %d generators, %d words", len(generators), len(columns))

    chains = [wedge(*(generators[i] for i in cols)) for cols in columns]
    if degree < 2:
        return [c for c in chains if c]

    images = [chain_boundary(c) for c in chains]
    rows: dict[Word, int] = {}
    for image in images:
        for word in image.words():
            rows.setdefault(word, len(rows))
    if not rows:
        return [c for c in chains if c]

    matrix = sympy.zeros(len(rows), len(columns))
    for col, image in enumerate(images):
        for word, coeff in image.items():
            matrix[rows[word], col] = sympy.Rational(coeff.numerator, coeff.denominator)

    cycles = []
    for vector in matrix.nullspace():
        cycle = ChainElement.zero(n, depth)
        for col, value in enumerate(vector):
            if value:
                cycle = cycle + chains[col].scale(Fraction(int(value.p), int(value.q)))
        cycles.append(cycle)
    return cycles


def chains_rank(chains: Sequence[ChainElement]) -> int:
    words: dict[Word, int] = {}
    for chain in chains:
        for word in chain.words():
            words.setdefault(word, len(words))
    if not chains or not words:
        return 0
    matrix = sympy.zeros(len(chains), len(words))
    for row, chain in enumerate(chains):
        for word, coeff in chain.items():
            matrix[row, words[word]] = sympy.Rational(coeff.numerator, coeff.denominator)
    return matrix.rank()


def span_contains(basis: Sequence[ChainElement], chain: ChainElement) -> bool:
    return chains_rank([*basis, chain]) == chains_rank(basis)


def sl2_cycle(n: int = 1, depth: int = DEFAULT_DEPTH) -> ChainElement:
    """e ∧ f ∧ h in gl_2 ⊗ 1."""
    e, f, h = sl2_triple(n, depth)
    return wedge(e, f, h)


def sl2_triple(n: int = 1, depth: int = DEFAULT_DEPTH) -> tuple[AugmentedOp, ...]:
    one = PsiSymbol.one(n, depth)
    e = AugmentedOp.elementary(1, 2, one)
    f = AugmentedOp.elementary(2, 1, one)
    h = AugmentedOp.elementary(1, 1, one) - AugmentedOp.elementary(2, 2, one)
    return e, f, h
