import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_sym(rng, m, scale=1.0):
    A = rng.standard_normal((m, m)) * scale
    return (A + A.T) / 2


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import lines

    rows = lines()
    if rows:
        terminalreporter.section("acceptance criteria")
        for row in rows:
            terminalreporter.write_line(row)
