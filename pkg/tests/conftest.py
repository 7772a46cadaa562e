"""Collects the one-line verdicts of the acceptance criteria and prints them at the end."""

import pytest

VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    return VERDICTS.append


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
