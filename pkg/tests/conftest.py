import numpy as np
import pytest

from hooke_billiard import BilliardTable

# lines collected by the acceptance tests, echoed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def table() -> BilliardTable:
    return BilliardTable(2.0, 1.0, 1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
