import sys

import numpy as np
import pytest

from probweb import EventSpace, JointDistribution
from probweb.extension import COUNTEREXAMPLE_MAXENT, COUNTEREXAMPLE_PRODUCT, counterexample_system


@pytest.fixture
def space3():
    return EventSpace([("X1", 2), ("X2", 2), ("X3", 2)])


@pytest.fixture
def p_star(space3):
    return JointDistribution(space3, COUNTEREXAMPLE_PRODUCT)


@pytest.fixture
def p_hat(space3):
    return JointDistribution(space3, COUNTEREXAMPLE_MAXENT)


@pytest.fixture
def counterexample():
    return counterexample_system()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
