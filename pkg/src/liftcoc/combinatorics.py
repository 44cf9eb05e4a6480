"""Index sets for the lifted cocycles: marked intervals, even sequences, circles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property


@dataclass(frozen=True)
class MarkedInterval:
    """Marks in {1..k-1}, pairwise at distance >= 2."""

    k: int
    marks: tuple[int, ...]

    def __post_init__(self):
        if any(not 1 <= m <= self.k - 1 for m in self.marks):
            raise ValueError(f"marks {self.marks} outside 1..{self.k - 1}")
        if any(b - a < 2 for a, b in zip(self.marks, self.marks[1:])):
            raise ValueError(f"marks {self.marks} are too close")


def enumerate_marked_intervals(k: int, l: int) -> list[MarkedInterval]:
    return [
        MarkedInterval(k, marks)
        for marks in itertools.combinations(range(1, k), l)
        if all(b - a >= 2 for a, b in zip(marks, marks[1:]))
    ]


@dataclass(frozen=True)
class EvenSequence:
    """a_1 = 1, k ones, 2s zeros, every zero run of even length."""

    bits: tuple[int, ...]
    k: int
    s: int

    def __post_init__(self):
        if len(self.bits) != self.k + 2 * self.s or self.bits[0] != 1:
            raise ValueError(f"{self.bits} is not a sequence of type ({self.k}, {self.s})")
        if sum(self.bits) != self.k:
            raise ValueError(f"{self.bits} does not contain {self.k} ones")
        if any(len(run) % 2 for run in zero_runs(self.bits)):
            raise ValueError(f"{self.bits} has an odd zero run")

    @property
    def first_zero(self) -> int:
        """1-based position of the first zero."""
        return self.bits.index(0) + 1


def zero_runs(bits: tuple[int, ...]) -> list[tuple[int, ...]]:
    runs, current = [], []
    for bit in bits:
        if bit:
            if current:
                runs.append(tuple(current))
            current = []
        else:
            current.append(bit)
    if current:
        runs.append(tuple(current))
    return runs


def enumerate_even_sequences(k: int, s: int) -> list[EvenSequence]:
    length = k + 2 * s
    out = []
    for zeros in itertools.combinations(range(1, length), 2 * s):
        bits = tuple(0 if i in zeros else 1 for i in range(length))
        if all(len(run) % 2 == 0 for run in zero_runs(bits)):
            out.append(EvenSequence(bits, k, s))
    return out


@dataclass(frozen=True)
class CompressedSequence:
    bits: tuple[int, ...]
    source_s1: int

    @property
    def sign(self) -> int:
        return -1 if self.source_s1 % 2 else 1

    @cached_property
    def labels(self) -> dict[int, int]:
        """Position (1-based) of each one → its derivation label 1..k in turn."""
        out, label = {}, 0
        for pos, bit in enumerate(self.bits, start=1):
            if bit:
                label += 1
                out[pos] = label
        return out


def compress(a: EvenSequence) -> CompressedSequence:
    """Shorten the first zero run by one; a tail run loses its last zero."""
    s1 = a.first_zero
    return CompressedSequence(a.bits[: s1 - 1] + a.bits[s1:], s1)


@dataclass(frozen=True)
class MarkedCircle:
    """Marks on a compressed sequence read cyclically, pairwise at cyclic distance >= 2.

    A mark and its successor are both ones of the parent.
    """

    length: int
    marks: tuple[int, ...]
    parent: CompressedSequence

    def __post_init__(self):
        if self.length != len(self.parent.bits):
            raise ValueError(f"circle of length {self.length} on {len(self.parent.bits)} positions")
        markable = _markable(self.parent)
        if any(m not in markable for m in self.marks):
            raise ValueError(f"marks {self.marks} are not all markable (allowed: {markable})")
        if any(
            _cyclic_gap(a, b, self.length) < 2 for a, b in itertools.combinations(self.marks, 2)
        ):
            raise ValueError(f"marks {self.marks} are too close on the circle")

    def successor(self, pos: int) -> int:
        return pos % self.length + 1


def _markable(c: CompressedSequence) -> list[int]:
    m = len(c.bits)
    return [i for i in range(1, m + 1) if c.bits[i - 1] and c.bits[i % m]]


def _cyclic_gap(a: int, b: int, m: int) -> int:
    d = abs(a - b)
    return min(d, m - d)


def enumerate_marked_circles(c: CompressedSequence, l: int) -> list[MarkedCircle]:
    m = len(c.bits)
    return [
        MarkedCircle(m, marks, c)
        for marks in itertools.combinations(_markable(c), l)
        if all(_cyclic_gap(a, b, m) >= 2 for a, b in itertools.combinations(marks, 2))
    ]
