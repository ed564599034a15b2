import os
import sys

# make the oracle helpers importable as a plain module
sys.path.insert(0, os.path.dirname(__file__))

import pytest

_acceptance_lines = pytest.StashKey()


@pytest.fixture
def acceptance_log(request):
    """Collects the PASS/FAIL lines of the acceptance suite."""
    return request.config.stash.setdefault(_acceptance_lines, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_acceptance_lines, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
