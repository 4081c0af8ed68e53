"""Integer partitions: counting, enumeration, shapes and the pigeonhole count.

Partitions are plain tuples of positive integers in weakly decreasing order;
the empty tuple is the partition of 0.
"""
from __future__ import annotations

import threading
from collections import Counter
from functools import lru_cache
from math import comb
from typing import Iterator, Sequence

Partition = tuple[int, ...]

_lock = threading.Lock()
_p_table: list[int] = [1]
_pm_tables: dict[int, list[int]] = {}


def as_partition(parts: Sequence[int]) -> Partition:
    """Validate ``parts`` and return it as a partition tuple."""
    out = tuple(int(p) for p in parts)
    for i, p in enumerate(out):
        if p < 1:
            raise ValueError(f"partition parts must be positive, got {out}")
        if i and out[i - 1] < p:
            raise ValueError(f"partition parts must be weakly decreasing, got {out}")
    return out


def count_partitions(q: int) -> int:
    """Number of partitions p(q), via Euler's pentagonal recurrence."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    with _lock:
        table = _p_table
        for n in range(len(table), q + 1):
            total = 0
            k = 1
            while True:
                g1 = k * (3 * k - 1) // 2
                if g1 > n:
                    break
                sign = 1 if k % 2 else -1
                total += sign * table[n - g1]
                g2 = g1 + k
                if g2 <= n:
                    total += sign * table[n - g2]
                k += 1
            table.append(total)
        return table[q]


def count_partitions_at_most(M: int, q: int) -> int:
    """Number of partitions of ``q`` into at most ``M`` positive parts.

    Computed by the bounded-part DP (parts of size <= M, which is the
    conjugate count), independently of :func:`count_partitions`.
    """
    if M < 1:
        raise ValueError("M must be positive")
    if q < 0:
        raise ValueError("q must be nonnegative")
    M = min(M, max(q, 1))
    with _lock:
        row = _pm_tables.get(M)
        if row is None or len(row) <= q:
            size = max(q + 1, 2 * len(row) if row else 64)
            row = [1] + [0] * (size - 1)
            for part in range(1, M + 1):
                for n in range(part, size):
                    row[n] += row[n - part]
            _pm_tables[M] = row
        return row[q]


def enumerate_partitions(q: int, max_parts: int) -> Iterator[Partition]:
    """Yield partitions of ``q`` with at most ``max_parts`` parts.

    Order is reverse-lexicographic: ``(4,), (3, 1), (2, 2), ...``.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    if max_parts < 1:
        raise ValueError("max_parts must be positive")
    if q == 0:
        yield ()
        return

    prefix: list[int] = []

    def rec(rest: int, largest: int, slots: int) -> Iterator[Partition]:
        if rest == 0:
            yield tuple(prefix)
            return
        if slots == 0:
            return
        # `slots` parts of size `largest` must be able to absorb `rest`
        lo = -(-rest // slots)
        for part in range(min(largest, rest), lo - 1, -1):
            prefix.append(part)
            yield from rec(rest - part, part, slots - 1)
            prefix.pop()

    yield from rec(q, q, max_parts)


def shape_of(kappa: Sequence[int], M: int) -> Partition:
    """Sorted multiplicities of the values of ``kappa`` zero-padded to ``M`` entries.

    >>> shape_of((4, 4, 4, 3, 1), 7)
    (3, 2, 1, 1)
    """
    if len(kappa) > M:
        raise ValueError(f"partition of length {len(kappa)} does not fit in {M} slots")
    counts = Counter(kappa)
    if len(kappa) < M:
        counts[0] += M - len(kappa)
    return tuple(sorted(counts.values(), reverse=True))


def _multiplicities(parts: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    c = Counter(parts)
    sizes = tuple(sorted(c, reverse=True))
    return sizes, tuple(c[s] for s in sizes)


def fits(lam: Sequence[int], mu: Sequence[int]) -> int:
    """Ways to put pigeons of volumes ``lam`` into holes of capacities ``mu``.

    Counts functions from the parts of ``lam`` to the parts of ``mu`` so that
    every hole is filled exactly. Parts are distinguishable even when equal.
    """
    if sum(lam) != sum(mu):
        raise ValueError(f"weights differ: |{tuple(lam)}| != |{tuple(mu)}|")
    sizes, counts = _multiplicities(lam)
    holes = tuple(sorted(mu, reverse=True))
    return _fits(sizes, counts, holes)


@lru_cache(maxsize=None)
def _fits(sizes: tuple[int, ...], counts: tuple[int, ...], holes: tuple[int, ...]) -> int:
    if not holes:
        return 1 if not any(counts) else 0
    hole, rest = holes[0], holes[1:]
    total = 0
    # choose how many pigeons of each size go into the first hole
    chosen = [0] * len(sizes)

    def rec(i: int, room: int, ways: int) -> None:
        nonlocal total
        if room == 0:
            left = tuple(c - a for c, a in zip(counts, chosen))
            total += ways * _fits(sizes, left, rest)
            return
        if i == len(sizes):
            return
        s = sizes[i]
        top = min(counts[i], room // s)
        for a in range(top, -1, -1):
            chosen[i] = a
            rec(i + 1, room - a * s, ways * comb(counts[i], a))
        chosen[i] = 0

    rec(0, hole, 1)
    return total


@lru_cache(maxsize=256)
def shape_census(q: int, M: int) -> dict[Partition, int]:
    """Map each shape of ``M`` to the number of ``kappa |- q`` (length <= M) having it."""
    census: Counter[Partition] = Counter()
    for kappa in enumerate_partitions(q, M):
        census[shape_of(kappa, M)] += 1
    return dict(census)


def count_with_shape(mu: Sequence[int], q: int, M: int) -> int:
    """Number of partitions of ``q`` of length <= ``M`` whose shape is ``mu``."""
    mu = as_partition(mu)
    if sum(mu) != M:
        raise ValueError(f"shape {mu} is not a partition of M={M}")
    return shape_census(q, M).get(mu, 0)
