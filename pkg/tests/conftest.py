from fractions import Fraction

import pytest

from qcsync.physics import DelayElement, MediumProfile

US = 10**6
NS = 10**3
M = 10**6  # micrometers per meter

# Filled by test_acceptance; printed once at the end of the run.
ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def medium():
    """c = 3e8 m/s, n_p = 1.25: v_p = 2.4e8 m/s, v_f = 2e8 m/s."""
    return MediumProfile(n_p=Fraction(5, 4), c_vacuum=300_000_000)


def delays(*durations, prefix="d"):
    return tuple(DelayElement(f"{prefix}{i}", d) for i, d in enumerate(durations))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
