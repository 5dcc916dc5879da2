import numpy as np
import pytest

from distboost.simgen import generate, make_scenario

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def conv_data():
    return generate(make_scenario("Conv", seed=11))


@pytest.fixture(scope="session")
def small_1a():
    return generate(make_scenario("1A", n=200, p_total=10, seed=5))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
