import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from defense_emissions.calibration import load_calibration  # noqa: E402
from defense_emissions.cli import data_path  # noqa: E402
from defense_emissions.synthetic import random_calibration  # noqa: E402

SEED = 20240611


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def fixture_calib():
    return load_calibration(data_path("calibration"))


@pytest.fixture(scope="session")
def toy_calib():
    return random_calibration(3, np.random.default_rng(3))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not getattr(module, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
