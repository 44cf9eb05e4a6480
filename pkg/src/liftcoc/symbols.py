"""
Formal pseudodifferential symbols in n variables with exact rational
coefficients: normal-ordered product, residue trace, log derivations.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Literal, Mapping, NamedTuple

from src.liftcoc.config import COEFF_RANGE, STABILITY_SLACK
from src.liftcoc.errors import ConfigError

logger = logging.getLogger(__name__)

Scalar = int | Fraction


# ── Monomials ────────────────────────────────────────────────────────────


class Monomial(NamedTuple):
    """x^x · ∂^d with every x to the left of every ∂."""

    x: tuple[int, ...]
    d: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.x)

    def fits(self, depth: int) -> bool:
        return min(self.x) >= -depth and min(self.d) >= -depth

    @classmethod
    def unit(cls, n: int) -> Monomial:
        return cls((0,) * n, (0,) * n)

    @classmethod
    def residue_point(cls, n: int) -> Monomial:
        return cls((-1,) * n, (-1,) * n)


@dataclass(frozen=True)
class TruncationPolicy:
    depth: int
    stability_slack: int = STABILITY_SLACK

    def __post_init__(self):
        if self.depth < 1:
            raise ConfigError(f"truncation depth must be >= 1, got {self.depth}")
        if self.stability_slack < 1:
            raise ConfigError("stability slack must be positive")

    def bumped(self) -> TruncationPolicy:
        return TruncationPolicy(self.depth + self.stability_slack, self.stability_slack)


# ── Symbols ──────────────────────────────────────────────────────────────


class PsiSymbol:
    """Finite sum of normal-ordered monomials, truncated below -depth."""

    __slots__ = ("_terms", "n", "depth")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None, n: int, depth: int):
        clean: dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            mono = Monomial(tuple(mono[0]), tuple(mono[1]))
            if mono.n != n or len(mono.d) != n:
                raise ValueError(f"monomial {mono} does not have {n} variables")
            coeff = Fraction(coeff)
            if coeff and mono.fits(depth):
                clean[mono] = clean.get(mono, Fraction(0)) + coeff
        self._terms = {m: c for m, c in clean.items() if c}
        self.n = n
        self.depth = depth

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction], n: int, depth: int) -> PsiSymbol:
        # Caller guarantees nonzero coefficients and retained monomials.
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.n = n
        obj.depth = depth
        return obj

    # ── constructors ──

    @classmethod
    def zero(cls, n: int, depth: int) -> PsiSymbol:
        return cls._raw({}, n, depth)

    @classmethod
    def one(cls, n: int, depth: int) -> PsiSymbol:
        return cls.monomial((0,) * n, (0,) * n, depth=depth)

    @classmethod
    def monomial(
        cls, x: Iterable[int], d: Iterable[int], coeff: Scalar = 1, *, depth: int
    ) -> PsiSymbol:
        mono = Monomial(tuple(x), tuple(d))
        return cls({mono: coeff}, mono.n, depth)

    @classmethod
    def x(cls, i: int, n: int, depth: int, power: int = 1) -> PsiSymbol:
        _check_index(i, n)
        exps = tuple(power if v == i - 1 else 0 for v in range(n))
        return cls.monomial(exps, (0,) * n, depth=depth)

    @classmethod
    def d(cls, i: int, n: int, depth: int, power: int = 1) -> PsiSymbol:
        _check_index(i, n)
        exps = tuple(power if v == i - 1 else 0 for v in range(n))
        return cls.monomial((0,) * n, exps, depth=depth)

    @classmethod
    def from_terms(
        cls, terms: Iterable[tuple[Iterable[int], Iterable[int], Scalar]], n: int, depth: int
    ) -> PsiSymbol:
        acc: dict[Monomial, Fraction] = defaultdict(Fraction)
        for x, d, coeff in terms:
            acc[Monomial(tuple(x), tuple(d))] += Fraction(coeff)
        return cls(acc, n, depth)

    # ── access ──

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def coefficient(self, mono: Monomial | tuple) -> Fraction:
        return self._terms.get(Monomial(tuple(mono[0]), tuple(mono[1])), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def with_depth(self, depth: int) -> PsiSymbol:
        kept = {m: c for m, c in self._terms.items() if m.fits(depth)}
        return PsiSymbol._raw(kept, self.n, depth)

    def max_exponent(self) -> int:
        """Largest exponent of any retained monomial (0 for the zero symbol)."""
        return max((max(m.x + m.d) for m in self._terms), default=0)

    def min_exponent(self) -> int:
        """Smallest exponent of any retained monomial (0 for the zero symbol)."""
        return min((min(m.x + m.d) for m in self._terms), default=0)

    # ── arithmetic ──

    def _combine(self, other: PsiSymbol, sign: int) -> PsiSymbol:
        _check_compatible(self, other)
        depth = min(self.depth, other.depth)
        acc = {m: c for m, c in self._terms.items() if m.fits(depth)}
        for mono, coeff in other._terms.items():
            if not mono.fits(depth):
                continue
            value = acc.get(mono, Fraction(0)) + sign * coeff
            if value:
                acc[mono] = value
            else:
                acc.pop(mono, None)
        return PsiSymbol._raw(acc, self.n, depth)

    def __add__(self, other: PsiSymbol) -> PsiSymbol:
        if not isinstance(other, PsiSymbol):
            return NotImplemented
        return self._combine(other, 1)

    def __sub__(self, other: PsiSymbol) -> PsiSymbol:
        if not isinstance(other, PsiSymbol):
            return NotImplemented
        return self._combine(other, -1)

    def __neg__(self) -> PsiSymbol:
        return PsiSymbol._raw({m: -c for m, c in self._terms.items()}, self.n, self.depth)

    def scale(self, factor: Scalar) -> PsiSymbol:
        factor = Fraction(factor)
        if not factor:
            return PsiSymbol.zero(self.n, self.depth)
        return PsiSymbol._raw(
            {m: c * factor for m, c in self._terms.items()}, self.n, self.depth
        )

    def __mul__(self, other: PsiSymbol | Scalar) -> PsiSymbol:
        if isinstance(other, PsiSymbol):
            return product(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other: Scalar) -> PsiSymbol:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, exponent: int) -> PsiSymbol:
        if exponent < 0:
            raise ValueError("only nonnegative powers of a symbol are defined")
        result = PsiSymbol.one(self.n, self.depth)
        for _ in range(exponent):
            result = product(result, self)
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PsiSymbol):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"PsiSymbol({self}, n={self.n}, depth={self.depth})"

    def __str__(self) -> str:
        return format_symbol(self)


def _check_index(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise ValueError(f"variable index {i} outside 1..{n}")


def _check_compatible(a: PsiSymbol, b: PsiSymbol) -> None:
    if a.n != b.n:
        raise ValueError(f"symbols in {a.n} and {b.n} variables cannot be combined")


def _format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def format_monomial(mono: Monomial) -> str:
    factors = []
    for name, exps in (("x", mono.x), ("d", mono.d)):
        for v, e in enumerate(exps, start=1):
            if e == 1:
                factors.append(f"{name}{v}")
            elif e:
                factors.append(f"{name}{v}^{e}")
    return "*".join(factors)


def format_symbol(symbol: PsiSymbol) -> str:
    """Canonical text form accepted back by the operator parser."""
    if not symbol:
        return "0"
    ordered = sorted(symbol.items(), key=lambda item: (-sum(item[0].x + item[0].d), item[0]))
    pieces = []
    for idx, (mono, coeff) in enumerate(ordered):
        body = format_monomial(mono)
        magnitude = abs(coeff)
        if not body:
            text = _format_rational(magnitude)
        elif magnitude == 1:
            text = body
        else:
            text = f"{_format_rational(magnitude)}*{body}"
        if idx == 0:
            pieces.append(f"-{text}" if coeff < 0 else text)
        else:
            pieces.append(f" - {text}" if coeff < 0 else f" + {text}")
    return "".join(pieces)


# ── Product ──────────────────────────────────────────────────────────────


@lru_cache(maxsize=1 << 16)
def _leibniz(b: int, c: int, kmax: int) -> tuple[tuple[int, Fraction], ...]:
    """(k, C(b,k)·c(c-1)…(c-k+1)) for ∂^b x^c, k = 0..kmax, stopping at the first zero."""
    terms = []
    coeff = Fraction(1)
    for k in range(kmax + 1):
        if k:
            coeff = coeff * (b - k + 1) * (c - k + 1) / k
        if not coeff:
            break
        terms.append((k, coeff))
    return tuple(terms)


@lru_cache(maxsize=1 << 18)
def _monomial_terms(
    m1: Monomial, m2: Monomial, depth: int
) -> tuple[tuple[Monomial, Fraction], ...]:
    per_variable = []
    for a, b, c, e in zip(m1.x, m1.d, m2.x, m2.d):
        kmax = min(a + c, b + e) + depth
        expansion = _leibniz(b, c, kmax)
        if not expansion:
            return ()
        per_variable.append([(a + c - k, b + e - k, coeff) for k, coeff in expansion])

    out = []
    for choice in itertools.product(*per_variable):
        coeff = math.prod((cf for _, _, cf in choice), start=Fraction(1))
        out.append(
            (Monomial(tuple(t[0] for t in choice), tuple(t[1] for t in choice)), coeff)
        )
    return tuple(out)


def monomial_product(m1: Monomial, m2: Monomial, policy: TruncationPolicy) -> PsiSymbol:
    acc: dict[Monomial, Fraction] = {}
    for mono, coeff in _monomial_terms(m1, m2, policy.depth):
        acc[mono] = acc.get(mono, Fraction(0)) + coeff
    return PsiSymbol({m: c for m, c in acc.items() if c}, m1.n, policy.depth)


def product(a: PsiSymbol, b: PsiSymbol) -> PsiSymbol:
    _check_compatible(a, b)
    depth = min(a.depth, b.depth)
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            for mono, coeff in _monomial_terms(m1, m2, depth):
                acc[mono] += c1 * c2 * coeff
    return PsiSymbol._raw({m: c for m, c in acc.items() if c}, a.n, depth)


def bracket(a: PsiSymbol, b: PsiSymbol) -> PsiSymbol:
    return product(a, b) - product(b, a)


def residue(a: PsiSymbol) -> Fraction:
    """Coefficient of x1^-1…xn^-1 ∂1^-1…∂n^-1."""
    return a.coefficient(Monomial.residue_point(a.n))


# ── Derivations ──────────────────────────────────────────────────────────

DerivationKind = Literal["lnx", "lnd", "inner"]


@dataclass(frozen=True)
class Derivation:
    kind: DerivationKind
    index: int | None = None
    inner: PsiSymbol | None = None

    def __post_init__(self):
        if self.kind in ("lnx", "lnd"):
            if self.index is None or self.index < 1:
                raise ValueError(f"{self.kind} needs a variable index >= 1")
        elif self.kind == "inner":
            if self.inner is None:
                raise ValueError("inner derivation needs a symbol")
        else:
            raise ValueError(f"unknown derivation kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "lnx":
            return f"ad ln x{self.index}"
        if self.kind == "lnd":
            return f"ad ln d{self.index}"
        return f"ad({self.inner})"


def AdLnX(i: int) -> Derivation:
    return Derivation("lnx", i)


def AdLnD(i: int) -> Derivation:
    return Derivation("lnd", i)


def AdInner(q: PsiSymbol) -> Derivation:
    return Derivation("inner", inner=q)


def _conjugation_rate(k: int) -> Fraction:
    """d/ds C(s, k) at s = 0."""
    return Fraction((-1) ** (k - 1), k)


@lru_cache(maxsize=1 << 14)
def _log_series(kind: str, c: int, b: int, kmax: int) -> tuple[tuple[int, Fraction], ...]:
    # lnd: Σ rate_k ff(c,k) x^{c-k} ∂^{b-k};  lnx: Σ -rate_k ff(b,k) x^{c-k} ∂^{b-k}
    top = c if kind == "lnd" else b
    sign = 1 if kind == "lnd" else -1
    terms = []
    falling = Fraction(1)
    for k in range(1, kmax + 1):
        falling *= top - k + 1
        if not falling:
            break
        terms.append((k, sign * _conjugation_rate(k) * falling))
    return tuple(terms)


def apply_derivation(derivation: Derivation, a: PsiSymbol) -> PsiSymbol:
    if derivation.kind == "inner":
        return bracket(derivation.inner, a)

    v = derivation.index - 1
    if v >= a.n:
        raise ValueError(f"{derivation} acts on a symbol in {a.n} variables")
    depth = a.depth
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    for mono, coeff in a.items():
        c, b = mono.x[v], mono.d[v]
        kmax = min(c, b) + depth
        for k, weight in _log_series(derivation.kind, c, b, kmax):
            x = mono.x[:v] + (c - k,) + mono.x[v + 1 :]
            d = mono.d[:v] + (b - k,) + mono.d[v + 1 :]
            acc[Monomial(x, d)] += coeff * weight
    return PsiSymbol._raw({m: c for m, c in acc.items() if c}, a.n, depth)


def derivation_basis(n: int) -> list[Derivation]:
    """ad ln x1 … ad ln xn, ad ln ∂1 … ad ln ∂n."""
    return [AdLnX(i) for i in range(1, n + 1)] + [AdLnD(i) for i in range(1, n + 1)]


# ── Q series ─────────────────────────────────────────────────────────────


@lru_cache(maxsize=256)
def _q_log(v: int, n: int, depth: int) -> PsiSymbol:
    terms = {}
    for m in range(1, depth + 1):
        exps = tuple(-m if u == v else 0 for u in range(n))
        terms[Monomial(exps, exps)] = Fraction(math.factorial(m - 1), m)
    return PsiSymbol._raw(terms, n, depth)


def q_series(i: int, j: int, n: int, policy: TruncationPolicy) -> PsiSymbol:
    """Q_ij for positions i, j (1-based) in derivation_basis(n)."""
    basis = derivation_basis(n)
    if not (1 <= i <= 2 * n and 1 <= j <= 2 * n):
        raise ValueError(f"derivation positions must lie in 1..{2 * n}")
    return q_between(basis[i - 1], basis[j - 1], n, policy)


def q_between(
    first: Derivation, second: Derivation, n: int, policy: TruncationPolicy
) -> PsiSymbol:
    """The symbol Q with [first, second] = ad Q."""
    if first.kind == "inner" and second.kind == "inner":
        return bracket(first.inner, second.inner).with_depth(policy.depth)
    if first.kind == "inner":
        return -apply_derivation(second, first.inner).with_depth(policy.depth)
    if second.kind == "inner":
        return apply_derivation(first, second.inner).with_depth(policy.depth)

    if first.index != second.index or first.kind == second.kind:
        return PsiSymbol.zero(n, policy.depth)
    q = _q_log(first.index - 1, n, policy.depth)
    return q if first.kind == "lnd" else -q


def commutator_defect(
    first: Derivation,
    second: Derivation,
    a: PsiSymbol,
    policy: TruncationPolicy,
    margin: int | None = None,
) -> PsiSymbol:
    """[first, second](a) - [Q, a] on the window where truncation is exact.

    The window drops exponents below -(depth - margin); margin defaults to the
    largest exponent occurring in `a`.
    """
    a = a.with_depth(policy.depth)
    lhs = apply_derivation(first, apply_derivation(second, a)) - apply_derivation(
        second, apply_derivation(first, a)
    )
    q = q_between(first, second, a.n, policy)
    defect = lhs - bracket(q, a)
    window = policy.depth - (a.max_exponent() if margin is None else margin)
    return defect.with_depth(max(window, 1))


def alternation_defect(
    derivations: list[Derivation], i: int, j: int, l: int, n: int, policy: TruncationPolicy
) -> PsiSymbol:
    """Σ over orderings (p, q, r) of (i, j, l): sign · D_r(Q_pq)."""
    total = PsiSymbol.zero(n, policy.depth)
    for perm in itertools.permutations(range(3)):
        p, q, r = ((i, j, l)[s] for s in perm)
        term = apply_derivation(
            derivations[r - 1],
            q_between(derivations[p - 1], derivations[q - 1], n, policy),
        )
        total = total + (term if permutation_sign(perm) > 0 else -term)
    return total


def permutation_sign(perm: Iterable[int]) -> int:
    perm = list(perm)
    inversions = sum(
        1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b]
    )
    return -1 if inversions % 2 else 1


# ── Stability ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class StabilityResult:
    value: Fraction
    stable: bool
    depths: tuple[int, int]
    bumped_value: Fraction


def stability_check(
    computation: Callable[[int], Fraction], policy: TruncationPolicy
) -> StabilityResult:
    """Evaluate at depth N and N + slack; stable iff the two values agree.

    Args:
        computation: depth → value; must rebuild everything that depends on the depth
        policy: Gives N and the slack
    """
    bumped = policy.bumped()
    value = Fraction(computation(policy.depth))
    check = Fraction(computation(bumped.depth))
    stable = value == check
    if not stable:
        logger.warning(
            "value moved from %s (depth %d) to %s (depth %d)",
            value,
            policy.depth,
            check,
            bumped.depth,
        )
    return StabilityResult(value, stable, (policy.depth, bumped.depth), check)


# ── Random instances ─────────────────────────────────────────────────────


def random_symbol(
    rng: random.Random,
    n: int,
    max_degree: int,
    depth: int,
    terms: int = 3,
    min_exponent: int = 0,
) -> PsiSymbol:
    """Random symbol with up to `terms` monomials.

    With min_exponent = 0 the monomials are polynomial of total degree <= max_degree.
    A negative min_exponent draws every exponent from [min_exponent, max_degree], so
    the symbol carries poles in x and ∂.
    """
    low, high = COEFF_RANGE
    coeffs = [c for c in range(low, high + 1) if c]
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    for _ in range(terms):
        if min_exponent < 0:
            exps = [rng.randint(min_exponent, max_degree) for _ in range(2 * n)]
        else:
            budget = rng.randint(0, max_degree)
            exps = [0] * (2 * n)
            for _ in range(budget):
                exps[rng.randrange(2 * n)] += 1
        acc[Monomial(tuple(exps[:n]), tuple(exps[n:]))] += rng.choice(coeffs)
    return PsiSymbol(acc, n, depth)
