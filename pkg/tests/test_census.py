from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from finegrad import census
from finegrad.asymptotics import pochhammer_factor, solve_constants
from finegrad.orbits import CycleIndexUnavailable, OrbitCounter, export_cycle_index
from finegrad.partitions import count_partitions_at_most


def test_n_ab_examples():
    assert census.n_ab(1) == 1
    assert census.n_ab(8) == 3
    assert census.n_ab(72) == 6


def _brute_abelian_groups(n: int) -> int:
    # invariant-factor decompositions d_1 | d_2 | ... with product n
    def rec(rest, prev):
        if rest == 1:
            return 1
        return sum(rec(rest // d, d) for d in range(2, rest + 1) if rest % d == 0 and d % prev == 0
                   and _divisible_chain(rest // d, d))
    return rec(n, 1)


def _divisible_chain(rest: int, d: int) -> bool:
    return rest == 1 or rest % d == 0


@given(st.integers(1, 400))
def test_n_ab_multiplicative_oracle(n):
    assert census.n_ab(n) == _brute_abelian_groups(n)


def test_n_matrix_examples():
    assert census.n_matrix(8) == 7
    assert census.n_matrix(96) == 38
    assert census.n_matrix(27, 3) == 1


def test_n_matrix_forms_agree():
    for char in (0, 3, 5, 7):
        for n in range(1, 10001):
            assert census._n_matrix_divisor_sum(n, char) == census._n_matrix_product(n, char)


def test_matrix_table(golden):
    values = census.matrix_counts(100)
    for cell in golden["matrix"]:
        assert census.n_matrix(cell["n"]) == int(values[cell["n"]]) == cell["value"]


@pytest.mark.parametrize("char", [0, 2, 3, 5])
def test_sieve_matches_direct(char):
    values = census.matrix_counts(3000, char)
    assert [int(x) for x in values[1:]] == [census.n_matrix(n, char) for n in range(1, 3001)]


def test_char_validation():
    with pytest.raises(census.InvalidArguments):
        census.n_matrix(5, 4)
    with pytest.raises(census.InvalidArguments):
        census.n_A(3, 2)
    assert census.check_char(0) == 0


def test_avg_matrix():
    assert census.avg_matrix(1) == 1.0
    assert census.avg_matrix(4) == 2.25
    assert census.avg_matrix(100, exact=True) == Fraction(sum(census.n_matrix(n) for n in range(1, 101)), 100)


def test_type_i_examples():
    assert census.n_A_typeI(3) == 2
    assert census.n_A_typeI(80) == 12
    assert census.n_A_typeI(26, 3) == 1
    with pytest.raises(census.InvalidArguments):
        census.n_A_typeI(1)


def test_f0_examples(counter):
    assert census.f0(4, counter) == 7
    assert census.f0(100, counter) == 5997150
    for n in range(1, 60, 2):
        assert census.f0(n, counter) == n // 2 + 1


def test_type_ii_examples(counter):
    assert census.n_A_typeII(3, counter) == 6
    assert census.n_A_typeII(100, counter) == 51
    for r in range(2, 101, 2):
        assert census.n_A_typeII(r, counter) == r // 2 + 1


def test_type_ii_needs_import(cache_dir):
    fresh = OrbitCounter(cache_dir=cache_dir)
    with pytest.raises(CycleIndexUnavailable, match="m=4"):
        census.n_A_typeII(15, fresh)
    row = census.count_row("A", 15, counter=fresh, strict=False)
    assert row.total is None and row.provenance == "needs-import" and row.missing_m == 4


def test_n_A_examples(counter):
    assert census.n_A(2, 0, counter).total == 4
    assert census.n_A(99, 0, counter).total == 5997166
    row = census.n_A(2, 3, counter)
    assert row.total == 2 and row.type_i is None


def test_n_B():
    assert [census.n_B(r) for r in (2, 7, 100)] == [3, 8, 101]
    with pytest.raises(census.InvalidArguments):
        census.n_B(1)


def test_f_pm_examples(counter):
    assert census.f_pm(8, "-", counter) == 8
    assert census.f_pm(6, "+", counter) == 8
    for r in range(1, 100, 2):
        assert census.f_pm(2 * r, "-", counter) == r // 2 + 2
    with pytest.raises(ValueError):
        census.f_pm(7, "+", counter)


def test_n_C_examples(counter):
    assert census.n_C(4, counter).total == 7
    assert census.n_C(100, counter).total == 456000882
    assert census.n_C(37, counter).total == 20
    assert census.n_C(1, counter).total == 2


def test_n_D_examples(counter, cache_dir):
    assert census.n_D(4).total == 17
    assert census.n_D(3, 0, counter).total == 8 == census.n_A(3, 0, counter).total
    with pytest.raises(census.InvalidArguments):
        census.n_D(4, 3)
    with pytest.raises(census.InvalidArguments):
        census.n_D(2)
    with pytest.raises(CycleIndexUnavailable):
        census.n_D(96, 0, OrbitCounter(cache_dir=cache_dir))


def test_n_D_odd_closed_form(counter):
    for r in range(3, 100, 2):
        expected = sum(count_partitions_at_most(3, 1 + 2 * s) for s in range(r // 2 + 1)) + r + 1
        assert census.n_D(r, 0, counter).total == expected


def _builtin_ok(r: int) -> bool:
    return r % 8 != 0


def test_series_tables(counter, golden):
    for cell in golden["seriesA"]:
        r = cell["r"]
        if (r + 1) % 16 == 0:
            continue
        row = census.n_A(r, 0, counter)
        assert (row.type_i, row.type_ii, row.total) == (cell["type_i"], cell["type_ii"], cell["total"])
    for key, fn in (("seriesC", census.n_C), ("seriesD", lambda r, c: census.n_D(r, 0, c))):
        for cell in golden[key]:
            if _builtin_ok(cell["r"]):
                assert fn(cell["r"], counter).total == cell["total"]


def test_avg_series(counter):
    assert census.avg_series("A", 3, counter=counter, exact=True) == Fraction(12, 3)
    assert census.avg_series("C", 4, counter=counter) == 3.75
    assert census.avg_series("D", 6, counter=counter, exact=True) == Fraction(8 + 17 + 15 + 26, 6)
    with pytest.raises(census.InvalidArguments):
        census.avg_series("B", 4)


def test_imports_do_not_change_builtin_rows(tmp_path, counter):
    limited = OrbitCounter(builtin_max_m=2, cache_dir=None)
    before = {r: census.count_row("C", r, counter=limited, strict=False) for r in range(1, 30)}
    path = tmp_path / "m3.txt"
    export_cycle_index(counter.cycle_index(3, "sp-"), path)
    limited.load(path)
    for r, row in before.items():
        after = census.count_row("C", r, counter=limited, strict=False)
        if row.total is not None:
            assert after == row
        elif r % 8:
            assert row.missing_m == 3
            assert after.total == census.n_C(r, counter).total
        else:
            assert after.total is None and after.missing_m == 4


@pytest.mark.parametrize("char", [0, 2, 3, 5])
def test_average_slope_with_coprime_euler_factor(char):
    # restricting to l coprime to c removes the whole Euler factor at c,
    # so the slope constant is a0 * prod_{m>=1} (1 - c^{-m})
    const = solve_constants().a0
    if char:
        const *= pochhammer_factor(char) * (1 - 1 / char)
    diff = census.avg_matrix(10**6, char) - census.avg_matrix(10**4, char)
    assert diff == pytest.approx(const * math.log(100), rel=0.03)
