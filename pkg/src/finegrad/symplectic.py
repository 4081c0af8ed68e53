"""Bit-packed linear algebra over GF(2) and the groups Sp_2m(2), ASp_2m(2).

Conventions
-----------
A vector ``x = (x_1, ..., x_2m)`` of ``T = Z_2^{2m}`` is an ``int`` whose bit
``i - 1`` holds ``x_i``; points of ``T`` are therefore indexed ``0 .. 4**m - 1``
by their integer value.

A matrix ``A`` is packed into one integer holding its columns: bits
``[j*2m, (j+1)*2m)`` store ``A e_{j+1}``. For ``m <= 3`` this fits in 36 bits,
so whole groups live in ``int64`` numpy arrays and are manipulated column-wise
with vectorised XOR/AND/parity.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .partitions import Partition

log = logging.getLogger(__name__)

#: Largest ``m`` for which groups are enumerated in-process.
MAX_BUILTIN_M = 3

ACTIONS = ("asp", "sp+", "sp-")


class BudgetExceeded(ValueError):
    """Requested computation is beyond the built-in enumeration budget."""


def _check_m(m: int, limit: int | None = None) -> None:
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if limit is not None and m > limit:
        raise BudgetExceeded(f"enumeration budget exceeded: m={m} (built-in limit m<={limit})")


def _check_vec(m: int, *xs: int) -> None:
    for x in xs:
        if not 0 <= x < 1 << (2 * m):
            raise ValueError(f"vector {x} is not in Z_2^{2 * m}")


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def reverse_bits(x: int, m: int) -> int:
    """Swap coordinates ``i`` and ``2m + 1 - i``."""
    d = 2 * m
    return int(format(x, f"0{d}b")[::-1], 2)


def sp_form(m: int, x: int, y: int) -> int:
    """The alternating form ``sum_i x_i y_{2m+1-i}`` over GF(2)."""
    _check_vec(m, x, y)
    return _parity(x & reverse_bits(y, m))


def q_form(m: int, x: int) -> int:
    """The quadratic form ``Q(x) = sum_{i<=m} x_i x_{2m+1-i}`` whose polar is :func:`sp_form`."""
    _check_vec(m, x)
    low = (1 << m) - 1
    return _parity(x & reverse_bits(x, m) & low)


def t_split(m: int) -> tuple[list[int], list[int]]:
    """Split ``T`` into ``(T_plus, T_minus)`` by the value of ``Q``, each sorted."""
    _check_m(m)
    plus, minus = [], []
    for x in range(1 << (2 * m)):
        (minus if q_form(m, x) else plus).append(x)
    return plus, minus


def point_count(m: int, action: str) -> int:
    """Size of the point set acted on: ``4**m`` or ``2**(m-1) (2**m +- 1)``."""
    if action == "asp":
        return 4**m
    if m == 0:
        return 1 if action == "sp+" else 0
    half = 1 << (m - 1)
    if action == "sp+":
        return half * ((1 << m) + 1)
    if action == "sp-":
        return half * ((1 << m) - 1)
    raise ValueError(f"unknown action {action!r}")


def sp_order(m: int) -> int:
    """``|Sp_2m(2)| = 2^{m^2} prod_{i=1}^m (2^{2i} - 1)``."""
    out = 1 << (m * m)
    for i in range(1, m + 1):
        out *= (1 << (2 * i)) - 1
    return out


def group_order(m: int, action: str) -> int:
    """Order of the group acting: ``ASp_2m(2)`` for ``asp``, ``Sp_2m(2)`` otherwise."""
    return (4**m if action == "asp" else 1) * sp_order(m)


# ---------------------------------------------------------------------------
# packed matrices


def identity(m: int) -> int:
    d = 2 * m
    return sum(1 << (j * d + j) for j in range(d))


def columns(A: int, m: int) -> list[int]:
    d = 2 * m
    mask = (1 << d) - 1
    return [(A >> (j * d)) & mask for j in range(d)]


def pack(cols: Sequence[int], m: int) -> int:
    d = 2 * m
    if len(cols) != d:
        raise ValueError(f"expected {d} columns, got {len(cols)}")
    return sum(c << (j * d) for j, c in enumerate(cols))


def apply(A: int, x: int, m: int) -> int:
    """Matrix-vector product ``A x``."""
    out = 0
    for j, c in enumerate(columns(A, m)):
        if x >> j & 1:
            out ^= c
    return out


def compose(A: int, B: int, m: int) -> int:
    """Matrix product ``A B``."""
    return pack([apply(A, c, m) for c in columns(B, m)], m)


def matrix(A: int, m: int) -> np.ndarray:
    """Dense ``2m x 2m`` 0/1 matrix of a packed element."""
    d = 2 * m
    out = np.zeros((d, d), dtype=np.uint8)
    for j, c in enumerate(columns(A, m)):
        for i in range(d):
            out[i, j] = c >> i & 1
    return out


def is_symplectic(A: int, m: int) -> bool:
    """Invertible and form-preserving on all basis pairs."""
    cols = columns(A, m)
    d = 2 * m
    for i in range(d):
        for j in range(d):
            if sp_form(m, cols[i], cols[j]) != sp_form(m, 1 << i, 1 << j):
                return False
    # a form-preserving map of a nondegenerate form is injective
    return True


def transvection(v: int, m: int) -> int:
    """The symplectic transvection ``x -> x + (x, v) v``."""
    _check_vec(m, v)
    return pack([(1 << j) ^ (v if sp_form(m, 1 << j, v) else 0) for j in range(2 * m)], m)


def transvections(m: int) -> list[int]:
    """All ``4**m - 1`` transvections, indexed by their nonzero direction vector."""
    _check_m(m)
    return [transvection(v, m) for v in range(1, 1 << (2 * m))]


def _parity_table(d: int) -> np.ndarray:
    x = np.arange(1 << d, dtype=np.int64)
    p = np.zeros_like(x)
    for k in range(d):
        p ^= (x >> k) & 1
    return p


def _left_transvect(G: np.ndarray, v: int, rv: int, m: int, par: np.ndarray) -> np.ndarray:
    d = 2 * m
    mask = (1 << d) - 1
    out = np.zeros_like(G)
    for j in range(d):
        c = (G >> (j * d)) & mask
        c ^= par[c & rv] * v
        out |= c << (j * d)
    return out


@lru_cache(maxsize=None)
def _enumerate_sp(m: int) -> np.ndarray:
    d = 2 * m
    par = _parity_table(d)
    gens = [(v, reverse_bits(v, m)) for v in range(1, 1 << d)]
    visited = np.array([identity(m)], dtype=np.int64)
    frontier = visited
    while frontier.size:
        cand = np.unique(np.concatenate([_left_transvect(frontier, v, rv, m, par) for v, rv in gens]))
        new = cand[~np.isin(cand, visited, assume_unique=True)]
        visited = np.union1d(visited, new)
        frontier = new
    visited.setflags(write=False)
    return visited


def enumerate_sp(m: int) -> np.ndarray:
    """All elements of ``Sp_2m(2)`` as a sorted ``int64`` array of packed matrices.

    Built as the breadth-first closure of :func:`transvections` under left
    multiplication; the size is checked against :func:`sp_order`.
    """
    _check_m(m, MAX_BUILTIN_M)
    G = _enumerate_sp(m)
    if G.size != sp_order(m):
        raise AssertionError(f"closure has {G.size} elements, expected {sp_order(m)}")
    return G


def point_tables(G: np.ndarray, m: int) -> np.ndarray:
    """Row ``k`` lists ``A_k x`` for every point ``x`` (shape ``len(G) x 4**m``)."""
    d = 2 * m
    n = 1 << d
    mask = (1 << d) - 1
    P = np.zeros((G.size, n), dtype=np.uint8)
    for x in range(1, n):
        j = (x & -x).bit_length() - 1
        P[:, x] = P[:, x & (x - 1)] ^ ((G >> (j * d)) & mask).astype(np.uint8)
    return P


def _q_table(m: int) -> np.ndarray:
    return np.array([q_form(m, x) for x in range(1 << (2 * m))], dtype=np.uint8)


def twist_vectors(P: np.ndarray, m: int) -> np.ndarray:
    """``t_A`` for every row of a point table, as ``uint8`` vectors.

    ``(t_A, e_i) = t_{2m+1-i}`` so the bits of ``t_A`` are read off from
    ``Q(A^{-1} e_i)``.
    """
    d = 2 * m
    Q = _q_table(m)
    t = np.zeros(P.shape[0], dtype=np.uint8)
    for i in range(1, d + 1):
        pre = np.argmax(P == (1 << (i - 1)), axis=1)  # A^{-1} e_i
        t |= Q[pre] << (d - i)
    return t


def twist_vector(A: int, m: int) -> int:
    """The unique ``t_A`` with ``(t_A, x) = Q(A^{-1} x) + Q(x)`` for all ``x``."""
    P = point_tables(np.array([A], dtype=np.int64), m)
    return int(twist_vectors(P, m)[0])


# ---------------------------------------------------------------------------
# cycle indices


@dataclass(frozen=True)
class CycleIndex:
    """Distribution of cycle types of a permutation group action.

    ``entries`` maps a cycle type (a partition of ``points``) to the number of
    group elements having it.
    """

    m: int
    action: str
    points: int
    order: int
    entries: dict[Partition, int] = field(compare=True)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.action not in ACTIONS:
            raise ValueError(f"unknown action {self.action!r}")
        if self.points != point_count(self.m, self.action):
            raise ValueError(f"points={self.points} inconsistent with action={self.action}, m={self.m}")
        for lam, c in self.entries.items():
            if sum(lam) != self.points:
                raise ValueError(f"cycle type {lam} has weight {sum(lam)} != {self.points}")
            if c < 1:
                raise ValueError(f"cycle type {lam} has nonpositive count {c}")
        if sum(self.entries.values()) != self.order:
            raise ValueError("order-sum mismatch: counts do not add up to the group order")
        if self.points and self.entries.get((1,) * self.points, 0) < 1:
            raise ValueError("identity cycle type missing")


def _cycle_lengths(perm: np.ndarray) -> np.ndarray:
    """Cycle length of every point, for a batch of permutations (rows)."""
    n = perm.shape[1]
    idx = np.arange(n, dtype=perm.dtype)
    cur = perm.copy()
    lengths = np.zeros(perm.shape, dtype=np.uint8)
    k = 1
    while True:
        hit = (cur == idx) & (lengths == 0)
        lengths[hit] = k
        if lengths.all():
            return lengths
        cur = np.take_along_axis(perm, cur.astype(np.intp), axis=1)
        k += 1


def tally_cycle_types(perms: np.ndarray, weights: np.ndarray | None = None,
                      batch: int = 200_000) -> Counter:
    """Aggregate cycle types of the rows of ``perms`` (optionally weighted)."""
    tally: Counter = Counter()
    n = perms.shape[1]
    if n == 0:
        tally[()] += int(perms.shape[0] if weights is None else weights.sum())
        return tally
    for s in range(0, perms.shape[0], batch):
        L = _cycle_lengths(perms[s:s + batch])
        L.sort(axis=1)
        keys = np.ascontiguousarray(L).view(np.dtype((np.void, n))).ravel()
        uniq, inverse = np.unique(keys, return_inverse=True)
        w = np.ones(len(keys), dtype=np.int64) if weights is None else weights[s:s + batch]
        sums = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(sums, inverse.ravel(), w)
        for key, c in zip(uniq, sums):
            point_lengths = np.frombuffer(bytes(key), dtype=np.uint8)
            tally[_cycle_type(point_lengths)] += int(c)
    return tally


def _cycle_type(point_lengths: Iterable[int]) -> Partition:
    c = Counter(int(x) for x in point_lengths)
    out: list[int] = []
    for length in sorted(c, reverse=True):
        out.extend([length] * (c[length] // length))
    return tuple(out)


def _popcount(a: np.ndarray, bits: int) -> np.ndarray:
    out = np.zeros_like(a)
    for k in range(bits):
        out += (a >> k) & 1
    return out


def _asp_pairs(P: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Representatives ``(A, t)`` of ASp modulo translation-conjugacy, with weights.

    Conjugating ``x -> Ax + t`` by the translation ``x -> x + s`` gives
    ``x -> Ax + t + (I + A)s``, so the cycle type only depends on ``t`` modulo
    ``Im(I + A)``. Each coset is represented by its element with zero bits at
    the pivot (leading-bit) positions of the image, weighted by the image size.
    """
    d = 2 * m
    n = 1 << d
    highbit = np.array([0] + [x.bit_length() - 1 for x in range(1, n)], dtype=np.int64)
    image = P ^ np.arange(n, dtype=np.uint8)
    pivots = np.zeros(P.shape[0], dtype=np.int64)
    for x in range(1, n):
        q = image[:, x]
        pivots |= np.where(q != 0, np.left_shift(1, highbit[q]), 0)
    t = np.arange(n, dtype=np.int64)
    a_idx, t_idx = np.nonzero((t[None, :] & pivots[:, None]) == 0)
    weights = np.left_shift(np.int64(1), _popcount(pivots, d))[a_idx]
    return a_idx, t_idx.astype(np.uint8), weights


def _affine_tally(P: np.ndarray, m: int, translations: str, batch: int = 200_000) -> Counter:
    n = P.shape[1]
    if translations == "all":
        tally: Counter = Counter()
        for t in range(n):
            tally.update(tally_cycle_types(P ^ np.uint8(t), batch=batch))
        return tally
    if translations != "cosets":
        raise ValueError(f"translations must be 'all' or 'cosets', got {translations!r}")
    a_idx, t_idx, weights = _asp_pairs(P, m)
    tally = Counter()
    for s in range(0, a_idx.size, batch):
        perms = P[a_idx[s:s + batch]] ^ t_idx[s:s + batch, None]
        tally.update(tally_cycle_types(perms, weights[s:s + batch], batch=batch))
    return tally


def _twisted_perms(P: np.ndarray, m: int, sign: str) -> np.ndarray:
    plus, minus = t_split(m)
    stratum = np.array(plus if sign == "+" else minus, dtype=np.intp)
    pos = np.full(P.shape[1], 255, dtype=np.uint8)
    pos[stratum] = np.arange(stratum.size, dtype=np.uint8)
    t = twist_vectors(P, m)
    return pos[P[:, stratum] ^ t[:, None]]


def cycle_index_asp(m: int, translations: str = "cosets") -> CycleIndex:
    """Cycle index of ``ASp_2m(2)`` acting on ``T`` by ``x -> Ax + t``.

    ``translations="all"`` walks every one of the ``4**m |Sp|`` affine maps;
    the default ``"cosets"`` visits one translation per coset of
    ``Im(I + A)`` and weights it, which yields the same distribution.
    """
    _check_m(m, MAX_BUILTIN_M)
    P = point_tables(enumerate_sp(m), m)
    tally = _affine_tally(P, m, translations)
    return CycleIndex(m, "asp", 4**m, group_order(m, "asp"), dict(tally))


def cycle_index_twisted(m: int, sign: str) -> CycleIndex:
    """Cycle index of the twisted action ``x -> Ax + t_A`` of ``Sp_2m(2)`` on ``T_sign``."""
    _check_m(m, MAX_BUILTIN_M)
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    P = point_tables(enumerate_sp(m), m)
    tally = tally_cycle_types(_twisted_perms(P, m, sign))
    action = "sp" + sign
    return CycleIndex(m, action, point_count(m, action), sp_order(m), dict(tally))


def cycle_indices(m: int) -> dict[str, CycleIndex]:
    """All three cycle indices for ``m``, sharing one enumeration of ``Sp_2m(2)``."""
    _check_m(m, MAX_BUILTIN_M)
    log.info("enumerating Sp_%d(2)", 2 * m)
    P = point_tables(enumerate_sp(m), m)
    out = {"asp": CycleIndex(m, "asp", 4**m, group_order(m, "asp"), dict(_affine_tally(P, m, "cosets")))}
    for sign in "+-":
        action = "sp" + sign
        tally = tally_cycle_types(_twisted_perms(P, m, sign))
        out[action] = CycleIndex(m, action, point_count(m, action), sp_order(m), dict(tally))
    return out


def action_permutations(m: int, action: str) -> np.ndarray:
    """Every group element of an action as a permutation row (small ``m`` only)."""
    _check_m(m, 2)
    P = point_tables(enumerate_sp(m), m)
    if action == "asp":
        return np.concatenate([P ^ np.uint8(t) for t in range(P.shape[1])])
    if action in ("sp+", "sp-"):
        return _twisted_perms(P, m, action[-1])
    raise ValueError(f"unknown action {action!r}")
