import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wtn.ingest import tensor_from_array  # noqa: E402
from wtn.synthetic import random_tensor  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20181020)


@pytest.fixture
def small_tensor(rng):
    return random_tensor(rng, 3, 6, density=0.6, year=2018)


@pytest.fixture
def chain_tensor():
    # 1 -> 2, 2 -> 3, node 3 has no exports
    values = np.zeros((1, 3, 3))
    values[0, 1, 0] = 1.0
    values[0, 2, 1] = 1.0
    return tensor_from_array(values, 2018, ["AA", "BB", "CC"])


# acceptance criterion id -> (description, passed)
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        desc, status = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{status}] criterion {key}: {desc}")
