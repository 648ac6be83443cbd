"""Shared fixtures plus the acceptance-criteria summary section.

Acceptance tests register one line per criterion through record(); the
terminal-summary hook prints them after the test run so the pass/fail
status of each criterion is visible even when pytest captures stdout.
"""

import numpy as np
import pytest

ACCEPT_SEED = 42
ACCEPT_TRIALS = 1_000_000

_acceptance_lines: list[str] = []


def record(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in _acceptance_lines:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mc_suite():
    """One full delayed-choice run shared by every test that needs it."""
    from spincat.experiments import delayed_suite

    return delayed_suite(trials=ACCEPT_TRIALS, seed=ACCEPT_SEED)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
