import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from anharmonic.numeric import DOUBLE, FLOAT, RATIONAL, NumericContext  # noqa: E402

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def rational():
    return NumericContext(RATIONAL)


@pytest.fixture
def mp64():
    return NumericContext(FLOAT, 64)


@pytest.fixture
def double():
    return NumericContext(DOUBLE)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
