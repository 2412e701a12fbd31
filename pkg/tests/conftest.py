import numpy as np
import pytest
from hypothesis import settings

from nwss.channel import ScenarioConfig

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def desk_cfg():
    return ScenarioConfig(M=4, K=4, S=4, g=2, s_p_per_group=(1, 1), r_per_group=(2, 2),
                          s_w=2, rho_p_per_group=(0.5, 0.5), rho_w=0.5,
                          a_p=0.85, a_w=0.85, a_s=0.6, snr_mu=10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
