from __future__ import annotations

import pytest

from primediff import build_table, champion_trace, gap_trace

# Filled by test_acceptance; printed at the end of the run.
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def table():
    return build_table(10**6)


@pytest.fixture(scope="session")
def small_table():
    return build_table(10**5)


@pytest.fixture(scope="session")
def trace_1e6(table):
    return champion_trace(table, 10**6)


@pytest.fixture(scope="session")
def trace_5e5(trace_1e6):
    return [r for r in trace_1e6 if r.x <= 5 * 10**5]


@pytest.fixture(scope="session")
def gaps_1e6(table):
    return gap_trace(table, 10**6)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {msg}")
