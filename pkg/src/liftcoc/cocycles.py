"""
Evaluation of the lifted cocycles Ψ on tuples of augmented operators.

Every formula is expanded into trace words: a sequence of slots, one per
argument, each optionally carrying a derivation position and a Q block
placed right after it. A word is evaluated as the signed sum over argument
permutations and derivation relabelings, computed by dynamic programming over
(used arguments, used labels) so shared prefixes are multiplied only once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable, Literal, Sequence

from src.liftcoc.cohomology import ChainElement, chain_boundary, word_ops
from src.liftcoc.combinatorics import (
    CompressedSequence,
    MarkedCircle,
    MarkedInterval,
    compress,
    enumerate_even_sequences,
    enumerate_marked_circles,
    enumerate_marked_intervals,
)
from src.liftcoc.config import DEFAULT_DEPTH
from src.liftcoc.errors import ArityMismatch, NotACycle
from src.liftcoc.matrices import (
    AugmentedOp,
    aug_derivation,
    aug_product,
    aug_trace,
)
from src.liftcoc.parser import parse_operator, split_arguments
from src.liftcoc.symbols import (
    AdLnD,
    AdLnX,
    Derivation,
    PsiSymbol,
    StabilityResult,
    TruncationPolicy,
    permutation_sign,
    q_between,
    stability_check,
)

logger = logging.getLogger(__name__)

Formula = Literal["auto", "interval", "pair", "circle"]

__all__ = [
    "CocycleSpec",
    "Slot",
    "TraceWord",
    "evaluate_O",
    "interval_class_term",
    "leading_term",
    "operands_from_text",
    "pair_family_terms",
    "psi",
    "psi_on_matrix_cycle",
    "psi_stable",
    "psi_zero",
    "suggested_depth",
    "twisted_generators",
]


# ── Cocycle description ──────────────────────────────────────────────────


def paired_derivations(k: int) -> tuple[Derivation, ...]:
    """ad ln ∂1, ad ln x1, ad ln ∂2, ad ln x2, … truncated to k entries."""
    out = []
    for v in range(1, k // 2 + k % 2 + 1):
        out.extend([AdLnD(v), AdLnX(v)])
    return tuple(out[:k])


@dataclass(frozen=True)
class CocycleSpec:
    k: int
    s: int = 1
    derivations: tuple[Derivation, ...] = ()
    formula: Formula = "auto"
    policy: TruncationPolicy = field(default_factory=lambda: TruncationPolicy(DEFAULT_DEPTH))
    n: int = 1

    def __post_init__(self):
        if self.k < 1 or self.s < 1:
            raise ValueError(f"need k >= 1 and s >= 1, got k={self.k}, s={self.s}")
        if len(self.derivations) != self.k:
            raise ArityMismatch(
                f"k={self.k} needs {self.k} derivations, got {len(self.derivations)}"
            )
        if self.formula == "interval" and self.s != 1:
            raise ValueError("the interval formula covers s = 1 only")
        if self.formula == "pair" and self.k != 2:
            raise ValueError("the pair formula covers k = 2 only")

    @classmethod
    def standard(
        cls, k: int, s: int = 1, depth: int = DEFAULT_DEPTH, formula: Formula = "auto"
    ) -> CocycleSpec:
        """Cocycle with the paired log derivations in ceil(k/2) variables."""
        return cls(
            k, s, paired_derivations(k), formula, TruncationPolicy(depth), n=(k + 1) // 2
        )

    @property
    def arity(self) -> int:
        return self.k + 2 * self.s - 1

    @property
    def resolved_formula(self) -> Formula:
        if self.formula != "auto":
            return self.formula
        if self.s == 1:
            return "interval"
        if self.k == 2:
            return "pair"
        return "circle"

    def with_depth(self, depth: int) -> CocycleSpec:
        return replace(self, policy=TruncationPolicy(depth, self.policy.stability_slack))

    def q(self, i: int, j: int) -> AugmentedOp:
        """Id ⊗ Q_ij for derivation positions i, j (1-based)."""
        symbol = q_between(
            self.derivations[i - 1], self.derivations[j - 1], self.n, self.policy
        )
        return AugmentedOp.identity(symbol)


# ── Trace words ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Slot:
    derivation: int | None = None  # derivation position applied to the argument
    q_block: tuple[int, int] | None = None  # Q between two positions, after the argument


@dataclass(frozen=True)
class TraceWord:
    slots: tuple[Slot, ...]
    weight: Fraction = Fraction(1)
    q_labels: frozenset[int] | None = None  # labels allowed inside Q blocks

    @property
    def q_count(self) -> int:
        return sum(1 for slot in self.slots if slot.q_block)

    @cached_property
    def consumption(self) -> tuple[int, ...]:
        order = []
        for slot in self.slots:
            if slot.derivation is not None:
                order.append(slot.derivation)
            if slot.q_block:
                order.extend(slot.q_block)
        return tuple(order)

    @property
    def has_q(self) -> bool:
        return self.q_count > 0


def _parity(mask: int) -> int:
    return -1 if mask.bit_count() % 2 else 1


class _Context:
    """Arguments, derived arguments and Q blocks for one evaluation."""

    def __init__(self, spec: CocycleSpec, args: Sequence[AugmentedOp]):
        depth = spec.policy.depth
        self.spec = spec
        self.args = [a.with_depth(depth) for a in args]
        self.unit = AugmentedOp.identity(PsiSymbol.one(spec.n, depth))
        self._derived: dict[tuple[int, int], AugmentedOp] = {}
        self._q: dict[tuple[int, int], AugmentedOp] = {}

    def derived(self, label: int, arg: int) -> AugmentedOp:
        key = (label, arg)
        if key not in self._derived:
            self._derived[key] = aug_derivation(self.spec.derivations[label], self.args[arg])
        return self._derived[key]

    def q(self, a: int, b: int) -> AugmentedOp:
        if (a, b) not in self._q:
            self._q[(a, b)] = self.spec.q(a + 1, b + 1)
        return self._q[(a, b)]


def _add(states: dict, key: tuple[int, int], value: AugmentedOp, sign: int) -> None:
    value = value if sign > 0 else -value
    states[key] = states[key] + value if key in states else value


def _alternation_sum(word: TraceWord, ctx: _Context) -> Fraction:
    """Σ over argument orders σ and relabelings τ of sign σ · sign τ · Tr(word)."""
    m, k = len(ctx.args), ctx.spec.k
    if len(word.slots) != m:
        raise ArityMismatch(f"trace word has {len(word.slots)} slots for {m} arguments")
    if sorted(word.consumption) != list(range(1, k + 1)):
        raise ValueError(f"trace word consumes derivation positions {word.consumption}")

    q_allowed = range(k) if word.q_labels is None else sorted(l - 1 for l in word.q_labels)
    states: dict[tuple[int, int], AugmentedOp] = {(0, 0): ctx.unit}
    for slot in word.slots:
        nxt: dict[tuple[int, int], AugmentedOp] = {}
        for (used_a, used_d), acc in states.items():
            for i in range(m):
                if used_a >> i & 1:
                    continue
                sign_a = _parity(used_a >> (i + 1))
                picks = []
                if slot.derivation is None:
                    picks.append((used_d, 1, ctx.args[i]))
                else:
                    for label in range(k):
                        if used_d >> label & 1:
                            continue
                        factor = ctx.derived(label, i)
                        if not factor.is_zero():
                            picks.append(
                                (used_d | 1 << label, _parity(used_d >> (label + 1)), factor)
                            )
                for mask_d, sign_d, factor in picks:
                    head = aug_product(acc, factor)
                    if head.is_zero():
                        continue
                    if not slot.q_block:
                        _add(nxt, (used_a | 1 << i, mask_d), head, sign_a * sign_d)
                        continue
                    for a in q_allowed:
                        if mask_d >> a & 1:
                            continue
                        sign_qa = _parity(mask_d >> (a + 1))
                        for b in q_allowed:
                            if b == a or (mask_d | 1 << a) >> b & 1:
                                continue
                            q = ctx.q(a, b)
                            if q.is_zero():
                                continue
                            sign_qb = _parity((mask_d | 1 << a) >> (b + 1))
                            piece = aug_product(head, q)
                            if not piece.is_zero():
                                _add(
                                    nxt,
                                    (used_a | 1 << i, mask_d | 1 << a | 1 << b),
                                    piece,
                                    sign_a * sign_d * sign_qa * sign_qb,
                                )
        states = nxt
        if not states:
            return Fraction(0)

    full = states.get(((1 << m) - 1, (1 << k) - 1))
    if full is None:
        return Fraction(0)
    consumption_sign = permutation_sign(p - 1 for p in word.consumption)
    return consumption_sign * aug_trace(full)


def _evaluate_words(words: Sequence[TraceWord], ctx: _Context) -> Fraction:
    total = Fraction(0)
    for word in words:
        raw = _alternation_sum(word, ctx)
        if raw:
            total += word.weight * raw / 2**word.q_count
    return total


# ── Word families ────────────────────────────────────────────────────────


def _interval_word(k: int, marks: Sequence[int]) -> TraceWord:
    slots = []
    for j in range(1, k + 1):
        if j in marks:
            slots.append(Slot(q_block=(j, j + 1)))
        elif j - 1 in marks:
            slots.append(Slot())
        else:
            slots.append(Slot(derivation=j))
    slots.append(Slot())
    return TraceWord(tuple(slots))


def interval_words(k: int) -> list[TraceWord]:
    words = [_interval_word(k, ())]
    for l in range(1, k // 2 + 1):
        words.extend(_interval_word(k, t.marks) for t in enumerate_marked_intervals(k, l))
    return words


def pair_family_terms(i: int) -> list[tuple[int, Fraction]]:
    """(slot of the second derivation, weight) for Ψ_{2i+1} with two derivations."""
    last = i + 1 if i % 2 else i + 2
    return [
        (p, Fraction(1, 2) if i % 2 == 0 and p == last else Fraction(1))
        for p in range(2, last + 1, 2)
    ]


def pair_words(i: int) -> list[TraceWord]:
    m = 2 * i + 1
    words = []
    for p, weight in pair_family_terms(i):
        slots = tuple(
            Slot(derivation=1) if j == 1 else Slot(derivation=2) if j == p else Slot()
            for j in range(1, m + 1)
        )
        words.append(TraceWord(slots, weight))
    q_slots = tuple(Slot() for _ in range(m - 1)) + (Slot(q_block=(1, 2)),)
    words.append(TraceWord(q_slots))
    return words


def _circle_base(compressed: CompressedSequence) -> list[Slot]:
    labels = compressed.labels
    return [
        Slot(derivation=labels[pos]) if bit else Slot()
        for pos, bit in enumerate(compressed.bits, start=1)
    ]


def _circle_word(circle: MarkedCircle) -> TraceWord:
    labels = circle.parent.labels
    slots = _circle_base(circle.parent)
    for mark in circle.marks:
        nxt = circle.successor(mark)
        slots[mark - 1] = Slot(q_block=(labels[mark], labels[nxt]))
        slots[nxt - 1] = Slot()
    return TraceWord(tuple(slots), Fraction(circle.parent.sign))


def circle_words(k: int, s: int, with_circles: bool = True) -> list[TraceWord]:
    words = []
    for sequence in enumerate_even_sequences(k, s):
        compressed = compress(sequence)
        words.append(TraceWord(tuple(_circle_base(compressed)), Fraction(compressed.sign)))
        if not with_circles:
            continue
        for l in range(1, k // 2 + 1):
            words.extend(_circle_word(c) for c in enumerate_marked_circles(compressed, l))
    return words


def trace_words(spec: CocycleSpec) -> list[TraceWord]:
    formula = spec.resolved_formula
    if formula == "interval":
        return interval_words(spec.k)
    if formula == "pair":
        return pair_words(spec.s)
    return circle_words(spec.k, spec.s)


# ── Evaluation ───────────────────────────────────────────────────────────


def _check_arity(spec: CocycleSpec, args: Sequence[AugmentedOp]) -> None:
    if len(args) != spec.arity:
        raise ArityMismatch(
            f"Ψ_{spec.arity} (k={spec.k}, s={spec.s}) takes {spec.arity} arguments, "
            f"got {len(args)}"
        )


def evaluate_O(
    marks: MarkedInterval | MarkedCircle | Sequence[int],
    spec: CocycleSpec,
    args: Sequence[AugmentedOp],
) -> Fraction:
    """The single term of Ψ indexed by a marked interval or a marked circle.

    Args:
        marks: MarkedInterval, MarkedCircle, or bare interval marks in 1..k-1
            (no marks give the leading term of the interval formula)
        spec: Cocycle; intervals need s = 1, a circle must come from a
            compressed sequence of length k + 2s - 1
        args: The Ψ arguments

    Returns:
        Fraction: the term, with the parent sequence's sign for a circle
    """
    _check_arity(spec, args)
    if isinstance(marks, MarkedCircle):
        if sum(marks.parent.bits) != spec.k or len(marks.parent.bits) != spec.arity:
            raise ValueError(f"circle of length {marks.length} does not index Ψ_{spec.arity}")
        word = _circle_word(marks)
    else:
        if spec.s != 1:
            raise ValueError("marked intervals describe the s = 1 family")
        if not isinstance(marks, MarkedInterval):
            marks = MarkedInterval(spec.k, tuple(marks))
        word = _interval_word(spec.k, marks.marks)
    return _evaluate_words([word], _Context(spec, args))


def psi(spec: CocycleSpec, args: Sequence[AugmentedOp]) -> Fraction:
    _check_arity(spec, args)
    words = trace_words(spec)
    logger.debug(
        "Ψ_%d via %s: %d trace words at depth %d",
        spec.arity,
        spec.resolved_formula,
        len(words),
        spec.policy.depth,
    )
    return _evaluate_words(words, _Context(spec, args))


OperandBuilder = Callable[[int], Sequence[AugmentedOp]]


def psi_stable(
    spec: CocycleSpec, args: Sequence[AugmentedOp] | OperandBuilder
) -> StabilityResult:
    """Ψ at the spec's depth N and at N + slack.

    Args:
        spec: Cocycle to evaluate; its policy gives N and the slack
        args: Operands, or a builder depth → operands. Use a builder when the
            operands depend on the truncation (parsed products with negative
            powers); fixed operands are only re-tagged, so dropped terms stay dropped.

    Returns:
        StabilityResult: value at N, the value at N + slack and the stable flag
    """
    build = args if callable(args) else (lambda depth: args)
    return stability_check(lambda depth: psi(spec.with_depth(depth), build(depth)), spec.policy)


def operands_from_text(
    texts: Sequence[str] | str, n: int, lam: int | Fraction | None = None
) -> OperandBuilder:
    """Builder that re-parses `texts` at every requested depth.

    Args:
        texts: Operator texts, or one comma separated string
        n: Number of variables
        lam: When set, the twisted generators for λ are prepended
    """
    if isinstance(texts, str):
        texts = split_arguments(texts)

    def build(depth: int) -> list[AugmentedOp]:
        ops = [parse_operator(text, n, depth) for text in texts]
        if lam is not None:
            ops = [*twisted_generators(n, lam, depth), *ops]
        return ops

    return build


def suggested_depth(ops: Sequence[AugmentedOp], series_order: int) -> int:
    """Largest positive input exponent + series order + 2, never shallower than an input term."""
    top = max((op.max_exponent() for op in ops), default=0)
    low = min((op.min_exponent() for op in ops), default=0)
    return max(max(top, 0) + series_order + 2, -low)


def psi_zero(spec: CocycleSpec, args: Sequence[AugmentedOp]) -> Fraction:
    """The circle family without Q blocks."""
    _check_arity(spec, args)
    return _evaluate_words(circle_words(spec.k, spec.s, with_circles=False), _Context(spec, args))


def leading_term(spec: CocycleSpec, args: Sequence[AugmentedOp]) -> Fraction:
    """The part of Ψ without Q blocks."""
    _check_arity(spec, args)
    words = [w for w in trace_words(spec) if not w.has_q]
    return _evaluate_words(words, _Context(spec, args))


def psi_on_matrix_cycle(
    spec: CocycleSpec, frame: Sequence[AugmentedOp], cycle: ChainElement
) -> Fraction:
    """Σ coeff · Ψ(frame, word) over the words of a matrix cycle."""
    degree = cycle.degree
    if degree is None:
        return Fraction(0)
    if len(frame) + degree != spec.arity:
        raise ArityMismatch(
            f"frame of {len(frame)} plus a {degree}-cycle does not fill Ψ_{spec.arity}"
        )
    if chain_boundary(cycle):
        raise NotACycle("the chain has a nonzero boundary")
    total = Fraction(0)
    for word, coeff in cycle.items():
        total += coeff * psi(spec, [*frame, *word_ops(word, spec.policy.depth)])
    return total


def twisted_generators(n: int, lam: int | Fraction, depth: int = DEFAULT_DEPTH) -> list[AugmentedOp]:
    """Id⊗∂_1 … Id⊗∂_n, then Id⊗(x_i Σ_j x_j∂_j − λ x_i) for each i."""
    euler = PsiSymbol.zero(n, depth)
    for j in range(1, n + 1):
        euler = euler + PsiSymbol.x(j, n, depth) * PsiSymbol.d(j, n, depth)
    out = [AugmentedOp.identity(PsiSymbol.d(i, n, depth)) for i in range(1, n + 1)]
    for i in range(1, n + 1):
        x_i = PsiSymbol.x(i, n, depth)
        out.append(AugmentedOp.identity(x_i * euler - x_i.scale(Fraction(lam))))
    return out


def unit_frame(n: int, depth: int = DEFAULT_DEPTH) -> list[AugmentedOp]:
    """Id⊗x_1, Id⊗∂_1, …, Id⊗x_n, Id⊗∂_n, E_11⊗1."""
    out = []
    for i in range(1, n + 1):
        out.append(AugmentedOp.identity(PsiSymbol.x(i, n, depth)))
        out.append(AugmentedOp.identity(PsiSymbol.d(i, n, depth)))
    out.append(AugmentedOp.elementary(1, 1, PsiSymbol.one(n, depth)))
    return out


def interval_class_term(n: int, l: int, depth: int = DEFAULT_DEPTH) -> Fraction:
    """Marked interval {1, 3, …, 2l-1} on the unit frame, Q blocks holding labels 1..2l.

    Summed over every admissible relabeling without the per-block halving.
    """
    if not 1 <= l <= n:
        raise ValueError(f"need 1 <= l <= n, got l={l}, n={n}")
    spec = CocycleSpec.standard(2 * n, depth=depth)
    marks = tuple(range(1, 2 * l, 2))
    base = _interval_word(2 * n, marks)
    word = TraceWord(base.slots, q_labels=frozenset(range(1, 2 * l + 1)))
    return _alternation_sum(word, _Context(spec, unit_frame(n, depth)))


def closed_form_interval_class(n: int, l: int) -> int:
    return (-1) ** n * math.factorial(l) ** 2 * math.factorial(2 * n - 2 * l) * 2**l
