from __future__ import annotations

import os
import tempfile
import time
from pathlib import Path

# must precede any finegrad import so the module-level counter sees it
if "FINEGRAD_CACHE_DIR" not in os.environ:
    os.environ["FINEGRAD_CACHE_DIR"] = tempfile.mkdtemp(prefix="finegrad-cache-")

import pytest

from finegrad.orbits import OrbitCounter, default_counter


@pytest.fixture(scope="session")
def golden() -> dict:
    from finegrad.cli import load_golden

    return load_golden()


WARMUP_SECONDS: dict[str, float] = {}
ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def counter() -> OrbitCounter:
    """Shared counter with every built-in cycle index (m <= 3) computed once."""
    start = time.perf_counter()
    for action in ("asp", "sp+", "sp-"):
        default_counter.cycle_index(3, action)
    WARMUP_SECONDS["m3"] = time.perf_counter() - start
    return default_counter


@pytest.fixture(scope="session")
def cache_dir(counter) -> Path:
    return Path(os.environ["FINEGRAD_CACHE_DIR"])


def golden_orbit_rows(golden: dict, action: str) -> dict[int, list[int]]:
    rows: dict[int, list[int]] = {}
    for c in golden["orbits"]:
        if c["action"] == action:
            rows.setdefault(c["m"], [0] * 12)[c["q"] - 1] = c["value"]
    return rows


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
