from __future__ import annotations

import pytest

from src.liftcoc.combinatorics import (
    EvenSequence,
    MarkedCircle,
    MarkedInterval,
    compress,
    enumerate_even_sequences,
    enumerate_marked_circles,
    enumerate_marked_intervals,
)


def marks(k: int, l: int) -> list[tuple[int, ...]]:
    return [t.marks for t in enumerate_marked_intervals(k, l)]


def test_marked_intervals():
    assert marks(2, 1) == [(1,)]
    assert marks(4, 2) == [(1, 3)]
    assert marks(6, 2) == [(1, 3), (1, 4), (1, 5), (2, 4), (2, 5), (3, 5)]
    assert marks(4, 1) == [(1,), (2,), (3,)]
    assert marks(3, 2) == []


def test_marked_interval_validation():
    with pytest.raises(ValueError):
        MarkedInterval(4, (1, 2))
    with pytest.raises(ValueError):
        MarkedInterval(4, (4,))


def bits(k: int, s: int) -> set[tuple[int, ...]]:
    return {a.bits for a in enumerate_even_sequences(k, s)}


def test_even_sequences():
    assert bits(2, 1) == {(1, 1, 0, 0), (1, 0, 0, 1)}
    assert bits(2, 2) == {(1, 1, 0, 0, 0, 0), (1, 0, 0, 1, 0, 0), (1, 0, 0, 0, 0, 1)}
    assert len(bits(3, 1)) == 3


def test_even_sequence_validation():
    with pytest.raises(ValueError):
        EvenSequence((1, 0, 1, 0), 2, 1)
    with pytest.raises(ValueError):
        EvenSequence((0, 1, 1, 0), 2, 1)


@pytest.mark.parametrize(
    "source,expected,s1,sign",
    [
        ((1, 0, 0, 1), (1, 0, 1), 2, 1),
        ((1, 1, 0, 0), (1, 1, 0), 3, -1),
        ((1, 0, 0, 0, 0, 1), (1, 0, 0, 0, 1), 2, 1),
    ],
)
def test_compress(source, expected, s1, sign):
    k = sum(source)
    compressed = compress(EvenSequence(source, k, (len(source) - k) // 2))
    assert compressed.bits == expected
    assert compressed.source_s1 == s1
    assert compressed.sign == sign


def test_compressed_labels():
    compressed = compress(EvenSequence((1, 1, 0, 0, 1, 1), 4, 1))
    assert compressed.bits == (1, 1, 0, 1, 1)
    assert compressed.labels == {1: 1, 2: 2, 4: 3, 5: 4}


def test_marked_circles():
    compressed = compress(EvenSequence((1, 1, 0, 0), 2, 1))
    circles = enumerate_marked_circles(compressed, 1)
    assert [c.marks for c in circles] == [(1,)]
    assert circles[0].successor(1) == 2
    assert enumerate_marked_circles(compressed, 2) == []


def test_marked_circles_wrap_around():
    compressed = compress(EvenSequence((1, 1, 0, 0, 1, 1), 4, 1))
    # pairs of adjacent ones: (1,2), (4,5) and the wrap (5,1)
    single = [c.marks for c in enumerate_marked_circles(compressed, 1)]
    assert single == [(1,), (4,), (5,)]
    assert enumerate_marked_circles(compressed, 1)[-1].successor(5) == 1
    double = [c.marks for c in enumerate_marked_circles(compressed, 2)]
    assert double == [(1, 4)]


@pytest.mark.parametrize(
    "marks",
    [
        (3,),  # position 3 is a zero
        (2,),  # successor of 2 is a zero
        (1, 5),  # adjacent across the wrap
        (4, 5),
    ],
)
def test_marked_circle_rejects_bad_marks(marks):
    compressed = compress(EvenSequence((1, 1, 0, 0, 1, 1), 4, 1))
    with pytest.raises(ValueError):
        MarkedCircle(5, marks, compressed)


def test_marked_circle_rejects_wrong_length():
    compressed = compress(EvenSequence((1, 1, 0, 0), 2, 1))
    with pytest.raises(ValueError):
        MarkedCircle(4, (1,), compressed)
