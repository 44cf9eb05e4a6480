"""Finite matrices over ΨDif_n plus a scalar-identity component."""

from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction
from itertools import permutations
from typing import Callable, Mapping

from src.liftcoc.errors import NonTraceClass
from src.liftcoc.symbols import (
    Derivation,
    Monomial,
    PsiSymbol,
    Scalar,
    apply_derivation,
    permutation_sign,
    product,
    random_symbol,
    residue,
)

Index = tuple[int, int]


class FinMatrix:
    """Sparse matrix with finitely many nonzero symbol entries, indices from 1."""

    __slots__ = ("_entries", "n", "depth")

    def __init__(self, entries: Mapping[Index, PsiSymbol] | None, n: int, depth: int):
        clean = {}
        for (i, j), entry in (entries or {}).items():
            if i < 1 or j < 1:
                raise ValueError(f"matrix indices start at 1, got ({i}, {j})")
            if entry.n != n:
                raise ValueError("matrix entry has the wrong number of variables")
            entry = entry.with_depth(depth)
            if entry:
                clean[(i, j)] = entry
        self._entries = clean
        self.n = n
        self.depth = depth

    @classmethod
    def zero(cls, n: int, depth: int) -> FinMatrix:
        return cls({}, n, depth)

    def items(self):
        return self._entries.items()

    def get(self, i: int, j: int) -> PsiSymbol:
        return self._entries.get((i, j), PsiSymbol.zero(self.n, self.depth))

    def __bool__(self) -> bool:
        return bool(self._entries)

    def window(self) -> int:
        return max((max(key) for key in self._entries), default=0)

    def map_entries(self, fn) -> FinMatrix:
        return FinMatrix({k: fn(v) for k, v in self._entries.items()}, self.n, self.depth)

    def _combine(self, other: FinMatrix, sign: int) -> FinMatrix:
        acc = dict(self._entries)
        for key, entry in other._entries.items():
            signed = entry if sign > 0 else -entry
            acc[key] = acc[key] + signed if key in acc else signed
        return FinMatrix(acc, self.n, min(self.depth, other.depth))

    def __add__(self, other: FinMatrix) -> FinMatrix:
        return self._combine(other, 1)

    def __sub__(self, other: FinMatrix) -> FinMatrix:
        return self._combine(other, -1)

    def __neg__(self) -> FinMatrix:
        return self.map_entries(lambda e: -e)

    def matmul(self, other: FinMatrix) -> FinMatrix:
        by_row: dict[int, list[tuple[int, PsiSymbol]]] = defaultdict(list)
        for (k, j), entry in other._entries.items():
            by_row[k].append((j, entry))
        depth = min(self.depth, other.depth)
        acc: dict[Index, PsiSymbol] = {}
        for (i, k), left in self._entries.items():
            for j, right in by_row.get(k, ()):
                term = product(left, right)
                acc[(i, j)] = acc[(i, j)] + term if (i, j) in acc else term
        return FinMatrix(acc, self.n, depth)

    def times_symbol(self, symbol: PsiSymbol) -> FinMatrix:
        """F · (Id ⊗ s): each entry multiplied by s on the right."""
        return FinMatrix(
            {k: product(v, symbol) for k, v in self._entries.items()},
            self.n,
            min(self.depth, symbol.depth),
        )

    def symbol_times(self, symbol: PsiSymbol) -> FinMatrix:
        """(Id ⊗ s) · F: each entry multiplied by s on the left."""
        return FinMatrix(
            {k: product(symbol, v) for k, v in self._entries.items()},
            self.n,
            min(self.depth, symbol.depth),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinMatrix):
            return NotImplemented
        return self.n == other.n and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self._entries.items())))


class AugmentedOp:
    """finite + Id ⊗ id_part."""

    __slots__ = ("finite", "id_part")

    def __init__(self, finite: FinMatrix, id_part: PsiSymbol):
        if finite.n != id_part.n:
            raise ValueError("finite part and identity part disagree on n")
        self.finite = finite
        self.id_part = id_part

    # ── constructors ──

    @classmethod
    def zero(cls, n: int, depth: int) -> AugmentedOp:
        return cls(FinMatrix.zero(n, depth), PsiSymbol.zero(n, depth))

    @classmethod
    def elementary(cls, i: int, j: int, symbol: PsiSymbol) -> AugmentedOp:
        """E_ij ⊗ symbol."""
        return cls(
            FinMatrix({(i, j): symbol}, symbol.n, symbol.depth),
            PsiSymbol.zero(symbol.n, symbol.depth),
        )

    @classmethod
    def identity(cls, symbol: PsiSymbol) -> AugmentedOp:
        """Id ⊗ symbol."""
        return cls(FinMatrix.zero(symbol.n, symbol.depth), symbol)

    @classmethod
    def from_entries(
        cls, entries: Mapping[Index, PsiSymbol], n: int, depth: int
    ) -> AugmentedOp:
        return cls(FinMatrix(entries, n, depth), PsiSymbol.zero(n, depth))

    # ── properties ──

    @property
    def n(self) -> int:
        return self.id_part.n

    @property
    def depth(self) -> int:
        return min(self.finite.depth, self.id_part.depth)

    def is_finite(self) -> bool:
        return not self.id_part

    def is_zero(self) -> bool:
        return not self.finite and not self.id_part

    def window(self) -> int:
        return self.finite.window()

    def _symbols(self) -> list[PsiSymbol]:
        return [self.id_part, *(e for _, e in self.finite.items())]

    def max_exponent(self) -> int:
        """Largest exponent over the identity part and every matrix entry."""
        return max(s.max_exponent() for s in self._symbols())

    def min_exponent(self) -> int:
        return min(s.min_exponent() for s in self._symbols())

    def with_depth(self, depth: int) -> AugmentedOp:
        return AugmentedOp(
            FinMatrix(dict(self.finite.items()), self.n, depth), self.id_part.with_depth(depth)
        )

    # ── arithmetic ──

    def __add__(self, other: AugmentedOp) -> AugmentedOp:
        if not isinstance(other, AugmentedOp):
            return NotImplemented
        return AugmentedOp(self.finite + other.finite, self.id_part + other.id_part)

    def __sub__(self, other: AugmentedOp) -> AugmentedOp:
        if not isinstance(other, AugmentedOp):
            return NotImplemented
        return AugmentedOp(self.finite - other.finite, self.id_part - other.id_part)

    def __neg__(self) -> AugmentedOp:
        return AugmentedOp(-self.finite, -self.id_part)

    def scale(self, factor: Scalar) -> AugmentedOp:
        return AugmentedOp(
            self.finite.map_entries(lambda e: e.scale(factor)), self.id_part.scale(factor)
        )

    def __mul__(self, other: AugmentedOp | Scalar) -> AugmentedOp:
        if isinstance(other, AugmentedOp):
            return aug_product(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other: Scalar) -> AugmentedOp:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def bracket(self, other: AugmentedOp) -> AugmentedOp:
        return aug_bracket(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AugmentedOp):
            return NotImplemented
        return self.finite == other.finite and self.id_part == other.id_part

    def __hash__(self) -> int:
        return hash((self.finite, self.id_part))

    def __repr__(self) -> str:
        return f"AugmentedOp({self})"

    def __str__(self) -> str:
        from src.liftcoc.parser import format_operator

        return format_operator(self)


# ── Operations ───────────────────────────────────────────────────────────


def aug_product(a: AugmentedOp, b: AugmentedOp) -> AugmentedOp:
    """(F1 + Id d1)(F2 + Id d2) = F1F2 + F1·d2 + d1·F2 + Id ⊗ d1d2."""
    finite = a.finite.matmul(b.finite)
    if b.id_part:
        finite = finite + a.finite.times_symbol(b.id_part)
    if a.id_part:
        finite = finite + b.finite.symbol_times(a.id_part)
    return AugmentedOp(finite, product(a.id_part, b.id_part))


def aug_bracket(a: AugmentedOp, b: AugmentedOp) -> AugmentedOp:
    return aug_product(a, b) - aug_product(b, a)


def aug_trace(a: AugmentedOp) -> Fraction:
    """Σ residue of the diagonal; the identity part must have zero residue."""
    if residue(a.id_part):
        raise NonTraceClass(
            f"identity part has residue {residue(a.id_part)}, trace diverges"
        )
    total = Fraction(0)
    for (i, j), entry in a.finite.items():
        if i == j:
            total += residue(entry)
    return total


def aug_derivation(derivation: Derivation, a: AugmentedOp) -> AugmentedOp:
    return AugmentedOp(
        a.finite.map_entries(lambda e: apply_derivation(derivation, e)),
        apply_derivation(derivation, a.id_part),
    )


def random_augmented(
    rng: random.Random,
    n: int,
    window: int,
    max_degree: int,
    depth: int,
    with_identity: bool = False,
    density: float = 0.5,
    min_exponent: int = 0,
) -> AugmentedOp:
    """Random finite matrix in gl_window (never all zero).

    Entries are polynomial unless min_exponent < 0, see random_symbol. The
    optional identity part is always polynomial.
    """
    entries = {}
    keys = [(i, j) for i in range(1, window + 1) for j in range(1, window + 1)]
    for key in keys:
        if rng.random() < density:
            entries[key] = random_symbol(
                rng, n, max_degree, depth, terms=2, min_exponent=min_exponent
            )
    if not any(entries.values()):
        entries[rng.choice(keys)] = random_symbol(rng, n, 0, depth, terms=1)
    op = AugmentedOp.from_entries(entries, n, depth)
    if with_identity:
        op = op + AugmentedOp.identity(random_symbol(rng, n, max_degree, depth, terms=2))
    return op


def scalar_trace(a: AugmentedOp) -> Fraction:
    """Ordinary matrix trace of the constant terms; for matrices in gl_M ⊗ 1."""
    unit = Monomial.unit(a.n)
    if a.id_part.coefficient(unit):
        raise NonTraceClass("identity part has a constant term, trace diverges")
    return sum(
        (entry.coefficient(unit) for (i, j), entry in a.finite.items() if i == j),
        Fraction(0),
    )


def alt_trace(
    ops: list[AugmentedOp], trace: Callable[[AugmentedOp], Fraction] = aug_trace
) -> Fraction:
    """Tr Σ_σ sign(σ) A_σ(1) ⋯ A_σ(m), by brute force over S_m."""
    if not ops:
        return Fraction(0)
    total = Fraction(0)
    for perm in permutations(range(len(ops))):
        word = ops[perm[0]]
        for idx in perm[1:]:
            word = aug_product(word, ops[idx])
        total += permutation_sign(perm) * trace(word)
    return total
