import numpy as np
import pytest

from wptfocus.channel import synthesize_channel
from wptfocus.geometry import free_space_3p8, hallway_3p8

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def hallway():
    return hallway_3p8()


@pytest.fixture(scope="session")
def free_space():
    return free_space_3p8()


@pytest.fixture(scope="session")
def hallway_h(hallway):
    return synthesize_channel(hallway)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
