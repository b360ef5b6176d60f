import numpy as np
import pytest

from chanstat import ChannelTransferFunction

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_ctf(rng, S=40, Q=12, T_s=1e-4, f_s=1e6):
    H = rng.standard_normal((S, Q)) + 1j * rng.standard_normal((S, Q))
    return ChannelTransferFunction(H, T_s, f_s, 25.5e9)


@pytest.fixture
def small_ctf(rng):
    return random_ctf(rng)
