import numpy as np
import pytest

from strathardy import abelian_group, halfspace_preset, heisenberg_group


@pytest.fixture(scope="session")
def h1():
    return heisenberg_group(1)


@pytest.fixture(scope="session")
def h2():
    return heisenberg_group(2)


@pytest.fixture(scope="session")
def r3():
    return abelian_group(3)


@pytest.fixture
def t_axis(h1):
    return halfspace_preset(h1, "t-axis", 0.0)


@pytest.fixture
def x1_axis(h1):
    return halfspace_preset(h1, "x1-axis", 0.0)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=7))


def pytest_terminal_summary(terminalreporter):
    # Acceptance verdicts are buffered by test_acceptance while stdout is
    # captured; replay them here so a plain `pytest` run still shows them.
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
