from __future__ import annotations

import io

import pytest

from finegrad import symplectic as sp
from finegrad.orbits import (
    BurnsideDivisibilityError,
    CycleIndexFormatError,
    CycleIndexUnavailable,
    OrbitCounter,
    burnside_gf,
    burnside_shape,
    export_cycle_index,
    format_cycle_index,
    import_cycle_index,
    orbit_bounds,
    orbit_count,
    orbits_direct,
    parse_cycle_index,
)
from finegrad.partitions import count_partitions, count_partitions_at_most

from conftest import golden_orbit_rows


def test_shape_examples(counter):
    assert burnside_shape(counter.cycle_index(1, "asp"), 4) == 5
    assert burnside_shape(counter.cycle_index(2, "sp-"), 5) == 7
    for m in (1, 2):
        for action in sp.ACTIONS:
            assert burnside_shape(counter.cycle_index(m, action), 0) == 1


def test_gf_examples(counter):
    assert burnside_gf(counter.cycle_index(2, "asp"), 12).values[1:] == (
        1, 2, 4, 9, 17, 38, 74, 158, 318, 657, 1304, 2612)
    assert burnside_gf(counter.cycle_index(3, "sp+"), 10).values[10] == 4161
    assert burnside_gf(counter.cycle_index(3, "asp"), 12).values[12] == 379501


def test_orbit_count_conventions(counter):
    assert orbit_count(0, "sp-", 3) == 0
    assert orbit_count(0, "sp-", 0) == 1
    assert orbit_count(0, "asp", 17) == 1
    assert orbit_count(0, "sp+", 5) == 1
    assert orbit_count(3, "sp-", 9, counter) == 444


def test_direct_examples():
    assert orbits_direct(1, "asp", 6) == 9
    assert orbits_direct(2, "sp+", 4) == 8
    assert orbits_direct(2, "asp", 2) == 2


@pytest.mark.parametrize("action", sp.ACTIONS)
@pytest.mark.parametrize("m", [1, 2])
def test_three_paths_agree(counter, m, action):
    cidx = counter.cycle_index(m, action)
    gf = burnside_gf(cidx, 6).values
    for q in range(7):
        assert orbits_direct(m, action, q) == burnside_shape(cidx, q) == gf[q]


@pytest.mark.slow
def test_shape_and_gf_agree_up_to_40(counter):
    for m in (1, 2, 3):
        for action in sp.ACTIONS:
            cidx = counter.cycle_index(m, action)
            gf = burnside_gf(cidx, 40).values
            qs = range(41) if m < 3 else (*range(13), 20, 27, 33, 40)
            if m == 3 and action == "asp":
                qs = (*range(13), 20, 24)
            for q in qs:
                assert burnside_shape(cidx, q) == gf[q], (m, action, q)


def test_small_q_rigidity(counter):
    for m in (1, 2, 3):
        for q in (0, 1, 2):
            assert counter.count(m, "asp", q) == count_partitions(q)


def test_bounds_examples(counter):
    for q in range(30):
        assert orbit_bounds(1, "asp", q)[0] == counter.count(1, "asp", q) == count_partitions_at_most(4, q)
        assert orbit_bounds(2, "sp-", q)[0] == counter.count(2, "sp-", q) == count_partitions_at_most(6, q)
    lo, hi = orbit_bounds(3, "asp", 12)
    assert lo <= 379501 <= hi


def test_sandwich(counter):
    for m in (1, 2, 3):
        for action in sp.ACTIONS:
            for q in range(102):
                lo, hi = orbit_bounds(m, action, q)
                assert lo <= counter.count(m, action, q) <= hi


def test_builtin_tables_match_golden(counter, golden):
    for action in sp.ACTIONS:
        for m, row in golden_orbit_rows(golden, action).items():
            if m <= 3:
                assert list(counter.table(m, action, 12)[1:]) == row


def test_round_trip(counter):
    for m in (1, 2, 3):
        for action in sp.ACTIONS:
            c = counter.cycle_index(m, action)
            buf = io.StringIO()
            export_cycle_index(c, buf)
            assert import_cycle_index(io.StringIO(buf.getvalue())) == c


def _text(counter, m=1, action="asp"):
    return format_cycle_index(counter.cycle_index(m, action))


def test_tampered_count_rejected(counter):
    lines = _text(counter).splitlines()
    last = lines[-1].rsplit(" ", 1)
    lines[-1] = f"{last[0]} {int(last[1]) + 1}"
    with pytest.raises(CycleIndexFormatError, match="order-sum mismatch") as exc:
        parse_cycle_index("\n".join(lines) + "\n")
    assert exc.value.line is not None


def test_malformed_lines_rejected(counter):
    good = _text(counter)
    bad_header = good.replace("cycle-index v1", "cycle-index v2", 1)
    with pytest.raises(CycleIndexFormatError):
        parse_cycle_index(bad_header)
    lines = good.splitlines()
    lines[-1] = lines[-1] + " "
    with pytest.raises(CycleIndexFormatError):
        parse_cycle_index("\n".join(lines) + "\n")
    lines = good.splitlines()
    lines[-1] = "1^9 6"  # weight 9 on 4 points
    with pytest.raises(CycleIndexFormatError):
        parse_cycle_index("\n".join(lines) + "\n")
    lines = good.splitlines()
    lines[-1] = "banana"
    with pytest.raises(CycleIndexFormatError) as exc:
        parse_cycle_index("\n".join(lines) + "\n")
    assert exc.value.line == len(lines)


def test_divisibility_guard():
    # a valid-looking but fake cycle index whose Burnside sum is not divisible
    fake = sp.CycleIndex(1, "asp", 4, 24, {(1, 1, 1, 1): 1, (4,): 23})
    with pytest.raises(BurnsideDivisibilityError):
        burnside_gf(fake, 4)
    with pytest.raises(BurnsideDivisibilityError):
        burnside_shape(fake, 2)


def test_missing_cycle_index():
    c = OrbitCounter(cache_dir=None)
    with pytest.raises(CycleIndexUnavailable, match="m=4") as exc:
        c.count(4, "asp", 3)
    assert exc.value.m == 4


def test_import_pathway(tmp_path, counter):
    """A counter limited to m <= 2 answers m = 3 queries from exported files."""
    limited = OrbitCounter(builtin_max_m=2, cache_dir=None)
    with pytest.raises(CycleIndexUnavailable, match="m=3"):
        limited.count(3, "sp+", 4)
    for action in sp.ACTIONS:
        path = tmp_path / f"m3-{action}.txt"
        export_cycle_index(counter.cycle_index(3, action), path)
        limited.load(path)
    for action in sp.ACTIONS:
        assert limited.table(3, action, 12) == counter.table(3, action, 12)
    assert {(e["m"], e["action"]) for e in limited.manifest} == {(3, a) for a in sp.ACTIONS}


def test_import_never_overrides_builtin(counter):
    c = OrbitCounter(cache_dir=None)
    fake = sp.CycleIndex(1, "asp", 4, 24, {(1, 1, 1, 1): 1, (4,): 23})
    c.add_import(fake)
    assert c.count(1, "asp", 4) == 5


def test_disk_cache_reused(cache_dir):
    assert (cache_dir / "cycle-index-asp-m3.txt").exists()
    fresh = OrbitCounter(cache_dir=cache_dir)
    assert fresh.count(3, "asp", 12) == 379501
