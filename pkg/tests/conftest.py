"""Shared fixtures and the acceptance report hook."""

import numpy as np
import pytest

from coopmac.discrete import DiscreteChannelSpec, InputLaw

ACCEPTANCE_LINES = []


@pytest.fixture
def adder():
    return DiscreteChannelSpec.binary_adder()


@pytest.fixture
def uniform_law():
    return InputLaw.independent([0.5, 0.5], [0.5, 0.5])


@pytest.fixture
def report():
    """Record one acceptance line; printed now and again in the terminal summary."""

    def emit(line: str):
        print(line)
        ACCEPTANCE_LINES.append(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
