import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from jcrlab.scenario import SceneParams, random_scene  # noqa: E402

VERDICTS = []


def record_verdict(line):
    VERDICTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return SceneParams()


@pytest.fixture
def scene(params):
    return random_scene(params, np.random.default_rng(11))


@pytest.fixture
def small_params():
    return SceneParams(n_comm_tx=4, n_comm_rx=2, n_radar_tx=4, n_radar_rx=2, n_targets=2)
