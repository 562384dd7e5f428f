import numpy as np
import pytest

from phasebound.states import StateVector

ACCEPTANCE_LINES = []


def random_state(rng, n_lo, n_hi, complex_=True):
    size = n_hi - n_lo + 1
    amps = rng.normal(size=size)
    if complex_:
        amps = amps + 1j * rng.normal(size=size)
    return StateVector.from_amplitudes(n_lo, amps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
