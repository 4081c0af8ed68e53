"""Orbit counting on multisets via Burnside and Polya, plus cycle-index file I/O."""
from __future__ import annotations

import logging
import os
import threading
from collections import Counter
from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from . import symplectic
from .partitions import Partition, count_partitions_at_most, fits, shape_census
from .symplectic import ACTIONS, BudgetExceeded, CycleIndex

log = logging.getLogger(__name__)

SHAPE_MAX_Q = 40
GF_MAX_DEGREE = 256
DIRECT_MAX_MULTISETS = 10**6

HEADER = "cycle-index v1"


class CycleIndexUnavailable(LookupError):
    def __init__(self, m: int, action: str):
        super().__init__(f"cycle index unavailable for m={m} (action {action}); supply one with --import")
        self.m = m
        self.action = action


class BurnsideDivisibilityError(ArithmeticError):
    """A Burnside numerator was not divisible by the group order."""


class CycleIndexFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class OrbitCountTable:
    m: int
    action: str
    values: tuple[int, ...]


def _exact_div(total: int, order: int, what: str) -> int:
    q, r = divmod(total, order)
    if r:
        raise BurnsideDivisibilityError(f"{what}: numerator {total} not divisible by group order {order}")
    return q


def burnside_shape(cidx: CycleIndex, q: int) -> int:
    """Orbit count from cycle types, the pigeonhole count and shape counts.

    ``N = |G|^{-1} sum_{lambda, mu} c(lambda) fits(lambda, mu) P(mu -> q)``.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q > SHAPE_MAX_Q:
        raise BudgetExceeded(f"shape path limited to q<={SHAPE_MAX_Q}; use burnside_gf for q={q}")
    M = cidx.points
    if M == 0:
        return 1 if q == 0 else 0
    census = shape_census(q, M)
    total = 0
    for lam, c in cidx.entries.items():
        total += c * sum(fits(lam, mu) * n for mu, n in census.items())
    return _exact_div(total, cidx.order, f"{cidx.action} m={cidx.m} q={q}")


def _series_for_type(lam: Partition, q_max: int) -> list[int]:
    s = [1] + [0] * q_max
    for part in lam:
        # multiply by 1/(1 - t^part)
        for j in range(part, q_max + 1):
            s[j] += s[j - part]
    return s


def burnside_gf(cidx: CycleIndex, q_max: int) -> OrbitCountTable:
    """Expand the cycle index at ``x_i = 1/(1 - t^i)`` up to degree ``q_max``."""
    if q_max < 0:
        raise ValueError("q_max must be nonnegative")
    if q_max > GF_MAX_DEGREE:
        raise BudgetExceeded(f"generating-function path limited to degree {GF_MAX_DEGREE}, got {q_max}")
    acc = [0] * (q_max + 1)
    for lam, c in cidx.entries.items():
        for j, a in enumerate(_series_for_type(lam, q_max)):
            acc[j] += c * a
    values = tuple(_exact_div(a, cidx.order, f"{cidx.action} m={cidx.m} q={j}") for j, a in enumerate(acc))
    return OrbitCountTable(cidx.m, cidx.action, values)


# ---------------------------------------------------------------------------
# cycle-index files


def _type_string(lam: Partition) -> str:
    c = Counter(lam)
    return " ".join(f"{length}^{c[length]}" for length in sorted(c))


def format_cycle_index(cidx: CycleIndex) -> str:
    lines = [HEADER, f"action={cidx.action}", f"m={cidx.m}", f"points={cidx.points}", f"order={cidx.order}"]
    body = sorted((_type_string(lam), c) for lam, c in cidx.entries.items())
    return "\n".join(lines + [f"{t} {c}" for t, c in body]) + "\n"


def export_cycle_index(cidx: CycleIndex, destination: str | os.PathLike | TextIO) -> None:
    text = format_cycle_index(cidx)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8", newline="\n")


def _header_value(line: str, key: str, lineno: int) -> str:
    prefix = key + "="
    if not line.startswith(prefix):
        raise CycleIndexFormatError(lineno, f"expected '{prefix}...', got {line!r}")
    return line[len(prefix):]


def _decimal(text: str, lineno: int) -> int:
    if not text.isdigit():
        raise CycleIndexFormatError(lineno, f"not a decimal integer: {text!r}")
    return int(text)


def parse_cycle_index(text: str) -> CycleIndex:
    """Parse and validate a ``cycle-index v1`` document."""
    raw = text.split("\n")
    if raw and raw[-1] == "":
        raw.pop()
    numbered = [(i + 1, ln) for i, ln in enumerate(raw)]
    for lineno, ln in numbered:
        if ln != ln.rstrip() or "\r" in ln:
            raise CycleIndexFormatError(lineno, "trailing whitespace or CR")
    content = [(i, ln) for i, ln in numbered if not ln.startswith("#")]
    if len(content) < 5:
        raise CycleIndexFormatError(len(raw), "truncated header")
    (l0, h), (l1, a), (l2, mm), (l3, pts), (l4, od) = content[:5]
    if h != HEADER:
        raise CycleIndexFormatError(l0, f"expected {HEADER!r}")
    action = _header_value(a, "action", l1)
    if action not in ACTIONS:
        raise CycleIndexFormatError(l1, f"unknown action {action!r}")
    m = _decimal(_header_value(mm, "m", l2), l2)
    points = _decimal(_header_value(pts, "points", l3), l3)
    if points != symplectic.point_count(m, action):
        raise CycleIndexFormatError(l3, f"points={points} inconsistent with action={action}, m={m}")
    order = _decimal(_header_value(od, "order", l4), l4)

    entries: dict[Partition, int] = {}
    previous = None
    total = 0
    for lineno, ln in content[5:]:
        fields = ln.split(" ")
        if len(fields) < 2:
            raise CycleIndexFormatError(lineno, "expected '<len>^<mult> ... <count>'")
        count = _decimal(fields[-1], lineno)
        lam: list[int] = []
        last_len = 0
        for tok in fields[:-1]:
            length, sep, mult = tok.partition("^")
            if not sep:
                raise CycleIndexFormatError(lineno, f"malformed cycle token {tok!r}")
            length_i, mult_i = _decimal(length, lineno), _decimal(mult, lineno)
            if length_i <= last_len or mult_i < 1:
                raise CycleIndexFormatError(lineno, "cycle lengths must increase and multiplicities be >= 1")
            last_len = length_i
            lam.extend([length_i] * mult_i)
        key = " ".join(fields[:-1])
        if previous is not None and key <= previous:
            raise CycleIndexFormatError(lineno, "cycle types not sorted or duplicated")
        previous = key
        if sum(lam) != points:
            raise CycleIndexFormatError(lineno, f"weight mismatch: cycle type sums to {sum(lam)}, points={points}")
        if count < 1:
            raise CycleIndexFormatError(lineno, "count must be positive")
        entries[tuple(sorted(lam, reverse=True))] = count
        total += count
    if total != order:
        raise CycleIndexFormatError(len(raw), f"order-sum mismatch: counts sum to {total}, order={order}")
    try:
        return CycleIndex(m, action, points, order, entries)
    except ValueError as exc:
        raise CycleIndexFormatError(len(raw), str(exc)) from exc


def import_cycle_index(source: str | os.PathLike | TextIO) -> CycleIndex:
    if hasattr(source, "read"):
        return parse_cycle_index(source.read())
    return parse_cycle_index(Path(source).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# orbit counting with caches


def default_cache_dir() -> Path | None:
    """On-disk cycle-index cache; ``FINEGRAD_CACHE_DIR=""`` disables it."""
    env = os.environ.get("FINEGRAD_CACHE_DIR")
    if env is not None:
        return Path(env) if env else None
    return Path.home() / ".cache" / "finegrad"


class OrbitCounter:
    """Orbit counts ``N(m, q)`` for the three actions, with memoisation.

    Cycle indices for ``m <= builtin_max_m`` are computed in-process (and
    persisted under ``cache_dir``); larger ``m`` must be supplied through
    :meth:`add_import`. Imports never override a built-in ``m``.
    """

    def __init__(self, builtin_max_m: int = symplectic.MAX_BUILTIN_M,
                 cache_dir: Path | None | str = "default"):
        self.builtin_max_m = builtin_max_m
        self.cache_dir = default_cache_dir() if cache_dir == "default" else cache_dir
        self.imports: dict[tuple[int, str], CycleIndex] = {}
        self.manifest: list[dict] = []
        self._indices: dict[tuple[int, str], CycleIndex] = {}
        self._tables: dict[tuple[int, str], tuple[int, ...]] = {}
        self._lock = threading.RLock()

    def add_import(self, cidx: CycleIndex, path: str | None = None) -> None:
        with self._lock:
            self.imports[(cidx.m, cidx.action)] = cidx
            self.manifest.append({"path": path, "action": cidx.action, "m": cidx.m})

    def load(self, path: str | os.PathLike) -> CycleIndex:
        cidx = import_cycle_index(path)
        self.add_import(cidx, str(path))
        return cidx

    def available(self, m: int, action: str) -> bool:
        return m <= self.builtin_max_m or (m, action) in self.imports

    def _cache_file(self, m: int, action: str) -> Path | None:
        if self.cache_dir is None:
            return None
        name = {"asp": "asp", "sp+": "spplus", "sp-": "spminus"}[action]
        return Path(self.cache_dir) / f"cycle-index-{name}-m{m}.txt"

    def cycle_index(self, m: int, action: str) -> CycleIndex:
        if action not in ACTIONS:
            raise ValueError(f"unknown action {action!r}")
        key = (m, action)
        with self._lock:
            if key in self._indices:
                return self._indices[key]
            if m > self.builtin_max_m:
                if key not in self.imports:
                    raise CycleIndexUnavailable(m, action)
                self._indices[key] = self.imports[key]
                return self._indices[key]
            path = self._cache_file(m, action)
            if path is not None and path.exists():
                try:
                    cidx = import_cycle_index(path)
                    if (cidx.m, cidx.action) == key:
                        self._indices[key] = cidx
                        return cidx
                except (CycleIndexFormatError, OSError) as exc:
                    log.warning("ignoring corrupt cache file %s: %s", path, exc)
            fresh = symplectic.cycle_indices(m)
            for action_, cidx in fresh.items():
                self._indices[(m, action_)] = cidx
                cpath = self._cache_file(m, action_)
                if cpath is not None:
                    try:
                        cpath.parent.mkdir(parents=True, exist_ok=True)
                        export_cycle_index(cidx, cpath)
                    except OSError as exc:
                        log.warning("could not write cache file %s: %s", cpath, exc)
            return self._indices[key]

    def table(self, m: int, action: str, q_max: int) -> tuple[int, ...]:
        """``N(m, 0..q_max)`` for ``m >= 1``."""
        key = (m, action)
        with self._lock:
            have = self._tables.get(key)
            if have is None or len(have) <= q_max:
                size = min(GF_MAX_DEGREE, max(q_max, 2 * len(have) if have else 128))
                self._tables[key] = burnside_gf(self.cycle_index(m, action), max(size, q_max)).values
            return self._tables[key][:q_max + 1]

    def count(self, m: int, action: str, q: int) -> int:
        if action not in ACTIONS:
            raise ValueError(f"unknown action {action!r}")
        if q < 0 or m < 0:
            raise ValueError("m and q must be nonnegative")
        if m == 0:
            if action == "sp-":
                return 1 if q == 0 else 0
            return 1
        return self.table(m, action, q)[q]


default_counter = OrbitCounter()


def orbit_count(m: int, action: str, q: int, counter: OrbitCounter | None = None) -> int:
    """Number of orbits on multisets of size ``q``, with the ``m = 0`` conventions."""
    return (counter or default_counter).count(m, action, q)


def orbit_bounds(m: int, action: str, q: int) -> tuple[int, int]:
    """``(lower, upper)`` from partitions, group order and the multiset count."""
    if m < 1:
        raise ValueError("m must be positive")
    M = symplectic.point_count(m, action)
    upper = comb(q + M - 1, q)
    order = symplectic.group_order(m, action)
    lower = max(count_partitions_at_most(M, q), -(-upper // order))
    return lower, upper


def _multisets(M: int, q: int) -> Iterable[tuple[int, ...]]:
    for combo in combinations_with_replacement(range(M), q):
        v = [0] * M
        for p in combo:
            v[p] += 1
        yield tuple(v)


def orbits_direct(m: int, action: str, q: int) -> int:
    """Count orbits by explicit enumeration of multisets (oracle, small cases only).

    Multisets are scanned in lexicographic order of their sorted point lists;
    each one not yet seen is the lexicographically smallest member of its
    orbit, i.e. its canonical form, and its whole orbit is then marked.
    """
    perms = symplectic.action_permutations(m, action)
    M = perms.shape[1]
    if M == 0:
        return 1 if q == 0 else 0
    total = comb(q + M - 1, q)
    if total > DIRECT_MAX_MULTISETS:
        raise BudgetExceeded(f"{total} multisets exceed the direct-enumeration budget")
    inverse = np.argsort(perms, axis=1)
    seen: set[bytes] = set()
    orbits = 0
    for v in _multisets(M, q):
        key = bytes(v)
        if key in seen:
            continue
        orbits += 1
        images = np.asarray(v, dtype=np.uint8)[inverse]
        seen.update(bytes(row) for row in np.unique(images, axis=0))
    return orbits
