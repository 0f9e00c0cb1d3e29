import random

import pytest

from hillkit.hill import HillContext
from hillkit.instances import golden

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def golden_ctx():
    return {k: HillContext(f) for k, f in golden().items()}


@pytest.fixture
def report_criterion():
    """Collect one summary line per acceptance criterion."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
