import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from unrolled_polar.codespec import from_frozen_indices  # noqa: E402


@pytest.fixture
def code16():
    """The (16,12) code whose first half is the (8,4) code with frozen {0,1,2,4}."""
    return from_frozen_indices(16, [0, 1, 2, 4])


@pytest.fixture
def code8():
    return from_frozen_indices(8, [0, 1, 2, 4])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
