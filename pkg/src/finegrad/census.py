"""Counts of fine gradings on matrix algebras and classical Lie algebras."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .orbits import CycleIndexUnavailable, OrbitCounter, default_counter
from .partitions import count_partitions

SERIES = ("M", "A", "B", "C", "D")
FIRST_INDEX = {"M": 1, "A": 2, "B": 2, "C": 1, "D": 3}


class InvalidArguments(ValueError):
    """Series/index/characteristic combination outside the classified range."""


@dataclass(frozen=True)
class GradingCountRow:
    series: str
    index: int
    total: int | None
    type_i: int | None = None
    type_ii: int | None = None
    provenance: str = "built-in"
    missing_m: int | None = None

    def as_dict(self) -> dict:
        return {
            "series": self.series,
            "index": self.index,
            "type_i": self.type_i,
            "type_ii": self.type_ii,
            "total": self.total,
            "provenance": self.provenance,
        }


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def check_char(char: int, lie: bool = False) -> int:
    if char != 0 and not _is_prime(char):
        raise InvalidArguments(f"characteristic must be 0 or a prime, got {char}")
    if lie and char == 2:
        raise InvalidArguments("characteristic 2 is excluded for Lie algebras")
    return char


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def n_ab(l: int) -> int:
    """Number of abelian groups of order ``l``."""
    if l < 1:
        raise ValueError("l must be positive")
    out = 1
    for e in factorize(l).values():
        out *= count_partitions(e)
    return out


@lru_cache(maxsize=None)
def _partition_prefix(alpha: int) -> int:
    return sum(count_partitions(j) for j in range(alpha + 1))


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _n_matrix_divisor_sum(n: int, char: int) -> int:
    return sum(n_ab(l) for l in divisors(n) if char == 0 or l % char)


def _n_matrix_product(n: int, char: int) -> int:
    out = 1
    for p, alpha in factorize(n).items():
        if p != char:
            out *= _partition_prefix(alpha)
    return out


def n_matrix(n: int, char: int = 0) -> int:
    """Fine gradings on ``M_n(F)``; divisor-sum and product forms are cross-checked."""
    if n < 1:
        raise ValueError("n must be positive")
    check_char(char)
    prod = _n_matrix_product(n, char)
    if n <= 10**6:
        div = _n_matrix_divisor_sum(n, char)
        if div != prod:
            raise AssertionError(f"N_M({n}) forms disagree: {div} != {prod}")
    return prod


def matrix_counts(n_max: int, char: int = 0) -> np.ndarray:
    """``N_M(j)`` for ``j = 0 .. n_max`` via a multiplicative sieve (entry 0 unused)."""
    check_char(char)
    out = np.ones(n_max + 1, dtype=np.int64)
    out[0] = 0
    if n_max < 2:
        return out
    sieve = np.ones(n_max + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n_max**0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    primes = np.nonzero(sieve)[0]
    root = int(n_max**0.5)
    g = np.array([_partition_prefix(a) for a in range(64)], dtype=np.int64)
    for p in primes:
        p = int(p)
        if p == char:
            continue
        if p <= root:
            exps = np.zeros(n_max + 1, dtype=np.int64)
            pk = p
            while pk <= n_max:
                exps[pk::pk] += 1
                pk *= p
            out *= g[exps]
        else:
            out[p::p] *= 2
    return out


def avg_matrix(n: int, char: int = 0, exact: bool = False) -> float | Fraction:
    """Average of ``N_M(j)`` over ``j <= n``."""
    if n < 1:
        raise ValueError("n must be positive")
    total = int(matrix_counts(n, char)[1:].sum())
    avg = Fraction(total, n)
    return avg if exact else float(avg)


# ---------------------------------------------------------------------------
# series A, B, C, D


def _f_sum(n: int, action: str, counter: OrbitCounter) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    alpha = (n & -n).bit_length() - 1
    k = n >> alpha
    total = 0
    for m in range(alpha + 1):
        top = (k << (alpha - m)) // 2
        for s in range(top + 1):
            total += counter.count(m, action, (k << (alpha - m)) - 2 * s)
    return total


def f0(n: int, counter: OrbitCounter | None = None) -> int:
    """Double sum of ``N(m, 2^{alpha-m} k - 2s)`` over the natural action, ``n = 2^alpha k``."""
    return _f_sum(n, "asp", counter or default_counter)


def f_pm(n: int, sign: str, counter: OrbitCounter | None = None) -> int:
    """Same double sum as :func:`f0` over the twisted action on ``T_+`` or ``T_-``."""
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and >= 2, got {n}")
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return _f_sum(n, "sp" + sign, counter or default_counter)


def n_A_typeI(r: int, char: int = 0) -> int:
    if r < 2:
        raise InvalidArguments(f"series A needs r >= 2, got {r}")
    check_char(char, lie=True)
    return n_matrix(r + 1, char) - (2 if is_power_of_two(r + 1) else 0)


def n_A_typeII(r: int, counter: OrbitCounter | None = None) -> int:
    if r < 2:
        raise InvalidArguments(f"series A needs r >= 2, got {r}")
    return f0(r + 1, counter) - (1 if is_power_of_two(r + 1) else 0)


def n_A(r: int, char: int = 0, counter: OrbitCounter | None = None) -> GradingCountRow:
    check_char(char, lie=True)
    if r == 2 and char == 3:
        return GradingCountRow("A", 2, 2)
    t1 = n_A_typeI(r, char)
    t2 = n_A_typeII(r, counter)
    return GradingCountRow("A", r, t1 + t2, t1, t2)


def n_B(r: int) -> int:
    if r < 2:
        raise InvalidArguments(f"series B needs r >= 2, got {r}")
    return r + 1


def n_C(r: int, counter: OrbitCounter | None = None) -> GradingCountRow:
    if r < 1:
        raise InvalidArguments(f"series C needs r >= 1, got {r}")
    # r = 1: T_- is empty for m = 0, so there is no excluded (q, s) = (2, 0) case
    adjust = 1 if r >= 2 and is_power_of_two(r) else 0
    return GradingCountRow("C", r, f_pm(2 * r, "-", counter) - adjust)


def n_D(r: int, char: int = 0, counter: OrbitCounter | None = None) -> GradingCountRow:
    check_char(char, lie=True)
    if r < 3:
        raise InvalidArguments(f"series D needs r >= 3, got {r}")
    if r == 4:
        if char != 0:
            raise InvalidArguments("D_4 is only classified in characteristic 0")
        return GradingCountRow("D", 4, 17)
    adjust = 1 if is_power_of_two(r) else 0
    return GradingCountRow("D", r, f_pm(2 * r, "+", counter) - adjust)


def count_row(series: str, index: int, char: int = 0, counter: OrbitCounter | None = None,
              strict: bool = True) -> GradingCountRow:
    """One table row; with ``strict=False`` missing cycle indices give a needs-import row."""
    if series not in SERIES:
        raise InvalidArguments(f"unknown series {series!r}")
    if series not in ("M", "A"):
        check_char(char, lie=True)
    try:
        if series == "M":
            return GradingCountRow("M", index, n_matrix(index, char))
        if series == "A":
            return n_A(index, char, counter)
        if series == "B":
            return GradingCountRow("B", index, n_B(index))
        if series == "C":
            return n_C(index, counter)
        return n_D(index, char, counter)
    except CycleIndexUnavailable as exc:
        if strict:
            raise
        return GradingCountRow(series, index, None, provenance="needs-import", missing_m=exc.m)


def avg_series(series: str, r_max: int, char: int = 0, counter: OrbitCounter | None = None,
               exact: bool = False) -> float | Fraction:
    """``(1/r_max)`` times the sum of totals from the first valid rank up to ``r_max``."""
    if series not in ("A", "C", "D"):
        raise InvalidArguments(f"averages are defined for series A, C, D, got {series!r}")
    start = FIRST_INDEX[series]
    if r_max < start:
        raise InvalidArguments(f"r_max must be >= {start} for series {series}")
    total = sum(count_row(series, r, char, counter).total for r in range(start, r_max + 1))
    avg = Fraction(total, r_max)
    return avg if exact else float(avg)
